// SPDX-License-Identifier: Apache-2.0
//
// pce - parametric channel estimation for multiuser MIMO-OFDM uplink sensing
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "pce/rootfind.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>

namespace pce
{

CompanionRoots companion_roots(const TrigSeries &series)
{
    CompanionRoots out;
    const double peak = series.max_abs();
    if (peak == 0.0)
    {
        out.flat = true;
        return out;
    }
    const double cutoff = 1e-12 * peak;
    long Mt = static_cast<long>(series.M);
    while (Mt > 0 && std::abs(series.at(Mt)) <= cutoff && std::abs(series.at(-Mt)) <= cutoff)
        --Mt;
    out.order = static_cast<std::size_t>(Mt);
    if (Mt == 0)
        return out;

    // p_k = c_{k - M'}, k = 0..2M'; monic companion with the negated normalised coefficients in the last column.
    const lapack_int d = static_cast<lapack_int>(2 * Mt);
    const cd lead = series.at(Mt);
    std::vector<cd> A(static_cast<std::size_t>(d) * d);
    for (lapack_int i = 0; i + 1 < d; ++i)
        A[static_cast<std::size_t>(i + 1 + i * d)] = 1.0;
    for (lapack_int i = 0; i < d; ++i)
    {
        A[static_cast<std::size_t>(i + (d - 1) * d)] = -series.at(i - Mt) / lead;
    }

    std::vector<cd> w(static_cast<std::size_t>(d));
    // zgeev balances (permutation and scaling) before the QR iteration.
    const lapack_int info =
        LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', d, A.data(), d, w.data(), nullptr, 1, nullptr, 1);
    if (info != 0)
        throw Error(ErrorCode::degenerate, "companion eigenvalue iteration failed to converge");
    out.roots = std::move(w);
    return out;
}

namespace
{

// Newton on g with derivative dg; accepts a step only if it reduces |g|.
double polish(const TrigSeries &g, const TrigSeries &dg, double x)
{
    double gx = eval_series(g, x);
    for (int step = 0; step < 5; ++step)
    {
        const double slope = eval_series(dg, x);
        if (slope == 0.0 || gx == 0.0)
            break;
        const double next = wrap_angle(x - gx / slope);
        const double gn = eval_series(g, next);
        if (!(std::abs(gn) < std::abs(gx)))
            break;
        x = next;
        gx = gn;
    }
    return x;
}

} // namespace

RootSet unit_circle_roots(const TrigSeries &series, double radial_tol)
{
    if (!(radial_tol > 0.0))
        throw Error(ErrorCode::invalid_argument, "radial_tol must be positive");
    RootSet out;
    const CompanionRoots cr = companion_roots(series);
    out.flat = cr.flat;
    if (cr.roots.empty())
        return out;

    const TrigSeries dg = differentiate(series);
    std::vector<double> angles;
    for (const cd &z : cr.roots)
    {
        if (std::abs(std::abs(z) - 1.0) > radial_tol)
            continue;
        angles.push_back(polish(series, dg, wrap_angle(std::arg(z))));
    }
    std::sort(angles.begin(), angles.end());

    const double accept = 1e-7 * (1.0 + series.max_abs());
    for (double a : angles)
    {
        if (!out.angles.empty() && a - out.angles.back() < 1e-9)
            continue;
        const double r = std::abs(eval_series(series, a));
        if (r > accept)
            continue;
        out.angles.push_back(a);
        out.residuals.push_back(r);
    }
    // pi and a value just above -pi are the same point on the circle.
    if (out.angles.size() > 1 && out.angles.front() + 2.0 * pi - out.angles.back() < 1e-9)
    {
        out.angles.erase(out.angles.begin());
        out.residuals.erase(out.residuals.begin());
    }
    return out;
}

double best_candidate(const CoordinateSlice &slice, const RootSet &roots, double current)
{
    double best = current;
    double best_value = slice.value(current);
    for (double a : roots.angles)
    {
        const double v = slice.value(a);
        if (v < best_value)
        {
            best_value = v;
            best = a;
        }
    }
    return best;
}

double best_candidate(const ResidualState &state, PathId id, Coordinate coordinate, const RootSet &roots,
                      double current)
{
    return best_candidate(CoordinateSlice(state, id, coordinate), roots, current);
}

} // namespace pce
