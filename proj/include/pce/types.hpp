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

#ifndef PCE_TYPES_HPP
#define PCE_TYPES_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pce
{

using cd = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

enum class ErrorCode
{
    invalid_argument = 1,
    dimension_mismatch,
    degenerate,
    not_isotropic,
    io,
    format,
};

// All library failures are reported through this exception; the code maps 1:1 onto the C status codes.
class Error : public std::runtime_error
{
  public:
    Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

// Resource grid and array sizes: subcarriers, OFDM symbols, receive and transmit antennas.
struct Dims
{
    std::size_t Nc = 30;
    std::size_t Ns = 15;
    std::size_t Nr = 32;
    std::size_t Nt = 4;

    std::size_t grid() const { return Nc * Ns; }
    std::size_t samples() const { return Nc * Ns * Nr; }
    bool operator==(const Dims &) const = default;
};

// Dense row-major complex 3-tensor. The last index runs fastest.
class Tensor3
{
  public:
    Tensor3() = default;
    Tensor3(std::size_t d0, std::size_t d1, std::size_t d2)
        : d0_(d0), d1_(d1), d2_(d2), data_(d0 * d1 * d2) {}

    std::size_t dim0() const { return d0_; }
    std::size_t dim1() const { return d1_; }
    std::size_t dim2() const { return d2_; }
    std::size_t size() const { return data_.size(); }

    cd &operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * d1_ + j) * d2_ + k]; }
    const cd &operator()(std::size_t i, std::size_t j, std::size_t k) const { return data_[(i * d1_ + j) * d2_ + k]; }

    cd *data() { return data_.data(); }
    const cd *data() const { return data_.data(); }
    std::vector<cd> &values() { return data_; }
    const std::vector<cd> &values() const { return data_; }

    bool same_shape(const Tensor3 &o) const { return d0_ == o.d0_ && d1_ == o.d1_ && d2_ == o.d2_; }

  private:
    std::size_t d0_ = 0, d1_ = 0, d2_ = 0;
    std::vector<cd> data_;
};

// Known transmitted symbols of one user, indexed (subcarrier n, symbol t, tx antenna v).
using PilotTensor = Tensor3;

// Observed samples, indexed (subcarrier n, symbol t, rx antenna u).
using ReceivedTensor = Tensor3;

// One multipath component: complex gain, folded delay and Doppler harmonics, AoA and AoD.
struct PathParams
{
    cd b{0.0, 0.0};
    double omega1 = 0.0; // rad per subcarrier index, (-pi, pi)
    double omega2 = 0.0; // rad per symbol index, (-pi, pi)
    double phi = 0.0;    // angle of arrival, (-pi/2, pi/2)
    double theta = 0.0;  // angle of departure, (-pi/2, pi/2)
};

// Path geometry in the phase domains the estimator works in:
// psi = -pi sin(phi) is the rx phase step, chi = pi sin(theta) the tx phase step.
struct Harmonics
{
    double omega1 = 0.0;
    double omega2 = 0.0;
    double psi = 0.0;
    double chi = 0.0;

    double &operator[](std::size_t i) { return i == 0 ? omega1 : i == 1 ? omega2 : i == 2 ? psi : chi; }
    double operator[](std::size_t i) const { return i == 0 ? omega1 : i == 1 ? omega2 : i == 2 ? psi : chi; }
};

enum class Coordinate
{
    omega1 = 0,
    omega2 = 1,
    psi = 2,
    chi = 3,
};

inline constexpr Coordinate all_coordinates[] = {Coordinate::omega1, Coordinate::omega2, Coordinate::psi, Coordinate::chi};

const char *coordinate_name(Coordinate c);

// Wrap into (-pi, pi].
inline double wrap_angle(double x)
{
    double r = std::remainder(x, 2.0 * pi);
    if (r <= -pi)
        r += 2.0 * pi;
    return r;
}

// Map a phase step in (-pi, pi] to an angle strictly inside (-pi/2, pi/2).
double phase_to_angle(double phase);

Harmonics to_harmonics(const PathParams &p);
PathParams to_path_params(cd gain, const Harmonics &h);

} // namespace pce

#endif
