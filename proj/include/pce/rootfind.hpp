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

#ifndef PCE_ROOTFIND_HPP
#define PCE_ROOTFIND_HPP

#include "pce/derivatives.hpp"

#include <vector>

namespace pce
{

struct CompanionRoots
{
    std::vector<cd> roots;
    std::size_t order = 0; // trimmed harmonic order M'; the polynomial has degree 2M'
    bool flat = false;     // every coefficient is zero
};

// Roots of p(z) = sum_m c_m z^(m+M') with z = exp(j x), as eigenvalues of the companion matrix.
// Trailing coefficients below 1e-12 max|c| are trimmed first.
CompanionRoots companion_roots(const TrigSeries &series);

// Real roots of a trigonometric series on (-pi, pi], ascending.
struct RootSet
{
    std::vector<double> angles;
    std::vector<double> residuals; // |eval_series| at each angle
    bool flat = false;
};

inline constexpr double default_radial_tol = 1e-4;

// Keeps eigenvalues within radial_tol of the unit circle, Newton-polishes their angles and drops
// duplicates closer than 1e-9 rad and any angle whose polished residual exceeds 1e-7 (1 + max|c|).
RootSet unit_circle_roots(const TrigSeries &series, double radial_tol = default_radial_tol);

// Argmin of the slice objective over roots and the current value. Ties keep the current value.
double best_candidate(const CoordinateSlice &slice, const RootSet &roots, double current);
double best_candidate(const ResidualState &state, PathId id, Coordinate coordinate, const RootSet &roots,
                      double current);

} // namespace pce

#endif
