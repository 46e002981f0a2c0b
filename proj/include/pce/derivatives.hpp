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

#ifndef PCE_DERIVATIVES_HPP
#define PCE_DERIVATIVES_HPP

#include "pce/likelihood.hpp"

#include <vector>

namespace pce
{

// Real trigonometric polynomial g(x) = sum_{m=-M}^{M} c_m exp(j m x), stored with c_{-m} = conj(c_m).
struct TrigSeries
{
    std::size_t M = 0;
    std::vector<cd> coeffs = {cd{}}; // coeffs[m + M]

    TrigSeries() = default;
    explicit TrigSeries(std::size_t order) : M(order), coeffs(2 * order + 1) {}

    cd &at(long m) { return coeffs[static_cast<std::size_t>(m + static_cast<long>(M))]; }
    cd at(long m) const { return coeffs[static_cast<std::size_t>(m + static_cast<long>(M))]; }

    double max_abs() const;
    double l1_norm() const;
};

// Re(sum_m c_m exp(j m x)).
double eval_series(const TrigSeries &s, double x);

// Term-wise j m c_m.
TrigSeries differentiate(const TrigSeries &s);

// The concentrated objective of one detached path as a function of a single coordinate,
// with the other three coordinates frozen at the path's current geometry.
//
// The residual is contracted against the frozen factors once on construction, so value() and
// derivative() cost O(M) and O(M^2) afterwards.
class CoordinateSlice
{
  public:
    CoordinateSlice(const ResidualState &state, PathId id, Coordinate coordinate);

    Coordinate coordinate() const { return coordinate_; }
    double current() const { return current_; }

    double value(double x) const;
    cd gain(double x) const;
    TrigSeries derivative() const;

  private:
    cd inner(double x) const;
    double energy(double x) const;

    Coordinate coordinate_;
    double current_;
    double residual_energy_;
    double inv_N0_;
    // Contracted residual z_i, so that <alpha, r> = sum_i exp(-j x i) z_i (omega1, omega2, psi)
    // or sum_v exp(j x v) z_v (chi).
    std::vector<cd> z_;
    // Regressor energy as a trigonometric polynomial in the coordinate; constant except for chi.
    TrigSeries energy_series_;
};

TrigSeries series_omega1(const ResidualState &state, PathId id);
TrigSeries series_omega2(const ResidualState &state, PathId id);
// In psi = -pi sin(phi). d/d(sin phi) = -pi d/d(psi) is left to the caller.
TrigSeries series_sinphi(const ResidualState &state, PathId id);
// In chi = pi sin(theta); requires isotropic pilots for the path's user.
TrigSeries series_sintheta(const ResidualState &state, PathId id);

TrigSeries coordinate_series(const ResidualState &state, PathId id, Coordinate c);

} // namespace pce

#endif
