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

#include "pce/derivatives.hpp"

#include "signal.hpp"

#include <algorithm>

namespace pce
{

double TrigSeries::max_abs() const
{
    double m = 0.0;
    for (const cd &c : coeffs)
        m = std::max(m, std::abs(c));
    return m;
}

double TrigSeries::l1_norm() const
{
    double s = 0.0;
    for (const cd &c : coeffs)
        s += std::abs(c);
    return s;
}

double eval_series(const TrigSeries &s, double x)
{
    cd acc = 0.0;
    const long M = static_cast<long>(s.M);
    for (long m = -M; m <= M; ++m)
        acc += s.at(m) * std::polar(1.0, static_cast<double>(m) * x);
    return acc.real();
}

TrigSeries differentiate(const TrigSeries &s)
{
    TrigSeries d(s.M);
    const long M = static_cast<long>(s.M);
    for (long m = -M; m <= M; ++m)
        d.at(m) = cd(0.0, static_cast<double>(m)) * s.at(m);
    return d;
}

namespace
{

// Lag products sum_i z_{i+m} conj(z_i) for m >= 0 (the m < 0 half is the conjugate).
std::vector<cd> lag_products(const std::vector<cd> &z)
{
    const std::size_t n = z.size();
    std::vector<cd> a(n);
    for (std::size_t m = 0; m < n; ++m)
    {
        cd acc = 0.0;
        for (std::size_t i = 0; i + m < n; ++i)
            acc += z[i + m] * std::conj(z[i]);
        a[m] = acc;
    }
    return a;
}

} // namespace

CoordinateSlice::CoordinateSlice(const ResidualState &state, PathId id, Coordinate coordinate)
    : coordinate_(coordinate)
{
    const PathRecord &rec = state.path(id);
    if (rec.attached)
        throw Error(ErrorCode::invalid_argument, "path must be detached from the residual");
    const Observation &obs = state.observation();
    const Dims &d = obs.dims();
    const PilotTensor &x = obs.pilots(rec.user);
    const Tensor3 &r = state.residual();
    const Harmonics &h = rec.geometry;

    current_ = h[static_cast<std::size_t>(coordinate)];
    residual_energy_ = state.residual_energy();
    inv_N0_ = 1.0 / obs.N0();

    const std::size_t Nc = d.Nc, Ns = d.Ns, Nr = d.Nr, Nt = d.Nt;
    const std::vector<cd> e1 = detail::phase_ramp(h.omega1, Nc), e2 = detail::phase_ramp(h.omega2, Ns),
                          e3 = detail::phase_ramp(h.psi, Nr);

    if (coordinate == Coordinate::psi)
    {
        const std::vector<cd> s = detail::beamformed_pilots(x, h.chi);
        z_.assign(Nr, 0.0);
        double grid_energy = 0.0;
        const cd *p = r.data();
        for (std::size_t n = 0; n < Nc; ++n)
            for (std::size_t t = 0; t < Ns; ++t)
            {
                const cd a = std::conj(e1[n] * e2[t] * s[n * Ns + t]);
                for (std::size_t u = 0; u < Nr; ++u)
                    z_[u] += a * *p++;
                grid_energy += std::norm(s[n * Ns + t]);
            }
        energy_series_.coeffs[0] = grid_energy * static_cast<double>(Nr);
    }
    else
    {
        // w_nt = sum_u exp(-j psi u) r_ntu
        std::vector<cd> w(Nc * Ns);
        const cd *p = r.data();
        for (std::size_t i = 0; i < Nc * Ns; ++i)
        {
            cd acc = 0.0;
            for (std::size_t u = 0; u < Nr; ++u)
                acc += std::conj(e3[u]) * *p++;
            w[i] = acc;
        }

        if (coordinate == Coordinate::chi)
        {
            z_.assign(Nt, 0.0);
            const cd *xp = x.data();
            for (std::size_t n = 0; n < Nc; ++n)
                for (std::size_t t = 0; t < Ns; ++t, xp += Nt)
                {
                    const cd a = std::conj(e1[n] * e2[t]) * w[n * Ns + t];
                    for (std::size_t v = 0; v < Nt; ++v)
                        z_[v] += std::conj(xp[v]) * a;
                }
            // |a(theta)^T x|^2 summed over the grid: P_m = Nr sum_nt sum_v x_v conj(x_{v+m}).
            energy_series_ = TrigSeries(Nt - 1);
            const long M = static_cast<long>(Nt) - 1;
            xp = x.data();
            for (std::size_t i = 0; i < Nc * Ns; ++i, xp += Nt)
                for (long m = 0; m <= M; ++m)
                {
                    cd acc = 0.0;
                    for (long v = 0; v + m <= M; ++v)
                        acc += xp[v] * std::conj(xp[v + m]);
                    energy_series_.at(m) += acc;
                }
            for (long m = 0; m <= M; ++m)
                energy_series_.at(m) *= static_cast<double>(Nr);
            energy_series_.at(0) = energy_series_.at(0).real();
            for (long m = 1; m <= M; ++m)
                energy_series_.at(-m) = std::conj(energy_series_.at(m));
        }
        else
        {
            const std::vector<cd> s = detail::beamformed_pilots(x, h.chi);
            double grid_energy = 0.0;
            for (const cd &v : s)
                grid_energy += std::norm(v);
            energy_series_.coeffs[0] = grid_energy * static_cast<double>(Nr);
            if (coordinate == Coordinate::omega1)
            {
                z_.assign(Nc, 0.0);
                for (std::size_t n = 0; n < Nc; ++n)
                    for (std::size_t t = 0; t < Ns; ++t)
                        z_[n] += std::conj(e2[t] * s[n * Ns + t]) * w[n * Ns + t];
            }
            else
            {
                z_.assign(Ns, 0.0);
                for (std::size_t t = 0; t < Ns; ++t)
                    for (std::size_t n = 0; n < Nc; ++n)
                        z_[t] += std::conj(e1[n] * s[n * Ns + t]) * w[n * Ns + t];
            }
        }
    }
    if (!(energy_series_.at(0).real() > 0.0))
        throw Error(ErrorCode::degenerate, "regressor has zero energy");
}

cd CoordinateSlice::inner(double x) const
{
    cd acc = 0.0;
    const double sign = coordinate_ == Coordinate::chi ? 1.0 : -1.0;
    for (std::size_t i = 0; i < z_.size(); ++i)
        acc += std::polar(1.0, sign * x * static_cast<double>(i)) * z_[i];
    return acc;
}

double CoordinateSlice::energy(double x) const
{
    if (energy_series_.M == 0)
        return energy_series_.coeffs[0].real();
    return eval_series(energy_series_, x);
}

double CoordinateSlice::value(double x) const
{
    const double e = energy(x);
    if (!(e > 0.0))
        throw Error(ErrorCode::degenerate, "regressor has zero energy");
    return (residual_energy_ - std::norm(inner(x)) / e) * inv_N0_;
}

cd CoordinateSlice::gain(double x) const
{
    const double e = energy(x);
    if (!(e > 0.0))
        throw Error(ErrorCode::degenerate, "regressor has zero energy");
    return inner(x) / e;
}

TrigSeries CoordinateSlice::derivative() const
{
    const double E = energy_series_.at(0).real();
    if (coordinate_ != Coordinate::chi)
    {
        // With b = G/E the objective is |r|^2 + |b|^2 E - 2 Re(conj(b) G). Both the gain-energy term
        // and the cross term reduce to the lag products A_m of z, weighted +1 and -2.
        const std::vector<cd> A = lag_products(z_);
        TrigSeries s(z_.size() - 1);
        const long M = static_cast<long>(s.M);
        for (long m = 1; m <= M; ++m)
        {
            // z enters as exp(-j x i), so |G|^2 = sum_m conj(A_m) exp(j m x).
            const cd combined = (1.0 - 2.0) * std::conj(A[static_cast<std::size_t>(m)]) / E;
            s.at(m) = cd(0.0, static_cast<double>(m)) * combined * inv_N0_;
            s.at(-m) = std::conj(s.at(m));
        }
        return s;
    }

    // chi: G(x) = sum_v exp(j x v) z_v, so |G|^2 = sum_m B_m exp(j m x) with B_m = sum_v z_{v+m} conj(z_v).
    // The gain-energy term carries the angle-dependent energy P(x); it is only a constant multiple
    // of |G|^2 when the pilots are isotropic, which is what keeps the derivative a finite series.
    const std::size_t Nt = z_.size();
    const long MB = static_cast<long>(Nt) - 1;
    TrigSeries B(Nt - 1);
    const std::vector<cd> lags = lag_products(z_);
    for (long m = 0; m <= MB; ++m)
    {
        B.at(m) = lags[static_cast<std::size_t>(m)];
        B.at(-m) = std::conj(B.at(m));
    }
    B.at(0) = B.at(0).real();

    TrigSeries s(2 * (Nt - 1));
    const long M = static_cast<long>(s.M);
    for (long m = 1; m <= M; ++m)
    {
        cd conv = 0.0;
        for (long i = -MB; i <= MB; ++i)
        {
            const long k = m - i;
            if (k >= -MB && k <= MB)
                conv += B.at(i) * energy_series_.at(k);
        }
        cd cross = (m <= MB) ? -2.0 * B.at(m) / E : cd{};
        const cd combined = cross + conv / (E * E);
        s.at(m) = cd(0.0, static_cast<double>(m)) * combined * inv_N0_;
        s.at(-m) = std::conj(s.at(m));
    }
    return s;
}

TrigSeries series_omega1(const ResidualState &state, PathId id)
{
    return CoordinateSlice(state, id, Coordinate::omega1).derivative();
}

TrigSeries series_omega2(const ResidualState &state, PathId id)
{
    return CoordinateSlice(state, id, Coordinate::omega2).derivative();
}

TrigSeries series_sinphi(const ResidualState &state, PathId id)
{
    return CoordinateSlice(state, id, Coordinate::psi).derivative();
}

TrigSeries series_sintheta(const ResidualState &state, PathId id)
{
    const PathRecord &rec = state.path(id);
    if (!state.observation().isotropic(rec.user))
        throw Error(ErrorCode::not_isotropic, "theta derivative requires isotropic pilots");
    return CoordinateSlice(state, id, Coordinate::chi).derivative();
}

TrigSeries coordinate_series(const ResidualState &state, PathId id, Coordinate c)
{
    switch (c)
    {
    case Coordinate::omega1:
        return series_omega1(state, id);
    case Coordinate::omega2:
        return series_omega2(state, id);
    case Coordinate::psi:
        return series_sinphi(state, id);
    case Coordinate::chi:
        return series_sintheta(state, id);
    }
    throw Error(ErrorCode::invalid_argument, "unknown coordinate");
}

} // namespace pce
