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

#ifndef PCE_MODEL_HPP
#define PCE_MODEL_HPP

#include "pce/types.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace pce
{

// Synthetic uplink scenario parameters. Defaults reproduce the two-user evaluation setup.
struct ScenarioConfig
{
    std::size_t K = 2;                          // number of users
    std::vector<std::size_t> L = {3, 3};        // true path count per user
    Dims dims;                                  // Nc, Ns, Nr, Nt
    double N0 = 1e-8;                           // noise variance per complex sample, linear
    std::vector<double> tx_powers = {-40, -40}; // per-user transmit power in dBW
    double rice_noncentrality = 1e-2;
    double rice_scale = 5e-3;
    double los_boost = 1.5; // multiplier applied to the strongest path of each user
    std::uint64_t seed = 1;
    bool noiseless = false;

    void validate() const;
};

// Subcarrier spacing and OFDM symbol length, used only to convert harmonics to physical units.
struct PhysicalGrid
{
    double f_scs = 15e3; // Hz
    double Ts = 1.0 / 15e3; // s
};

using Channels = std::vector<std::vector<PathParams>>;

struct Scenario
{
    ScenarioConfig config;
    Channels truth;                  // per user, in draw order
    std::vector<PilotTensor> pilots; // per user, (n, t, v)
    ReceivedTensor received;         // (n, t, u)
    std::uint64_t noise_seed = 0;
};

// splitmix64 of (base, stream); used to fan one seed out into independent generator streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

double dbw_to_watts(double dbw);

// ULA response: element i is exp(-j pi i sin(angle)).
std::vector<cd> steering(double angle, std::size_t N);

// Noise-free received mean summed over all users and paths.
ReceivedTensor synthesize_mean(const Channels &channels, std::span<const PilotTensor> pilots, const Dims &dims);

// Mean plus circular complex Gaussian noise of variance N0; deterministic in noise_seed.
ReceivedTensor synthesize_received(const Channels &channels, std::span<const PilotTensor> pilots, const Dims &dims,
                                   double N0, std::uint64_t noise_seed);

// One active transmit antenna per resource element with a unit-modulus symbol of random phase,
// scaled by sqrt(power). Every resource element then radiates |x|^2 regardless of departure angle.
PilotTensor generate_isotropic_pilots(const Dims &dims, double power_dbw, std::uint64_t seed);

// Max over theta_grid of |S(theta) - mean S| / mean S with S(theta) = sum_nt |a(theta)^T x_nt|^2.
double check_isotropy(const PilotTensor &pilots, std::span<const double> theta_grid);

// The same with a uniform 128-point grid over (-pi/2, pi/2).
double check_isotropy(const PilotTensor &pilots);

// Magnitude draw from a Rice distribution.
template <class Rng>
double sample_rice(Rng &rng, double noncentrality, double scale);

Scenario sample_scenario(const ScenarioConfig &config);

// Rebuild pilots and received tensor of an existing ground truth (used after changing powers or noise).
Scenario build_scenario(const ScenarioConfig &config, Channels truth);

// delay in s, doppler in Hz; offsets are folded in and taken as zero.
std::pair<double, double> omega_to_physical(double omega1, double omega2, const PhysicalGrid &grid);
std::pair<double, double> physical_to_omega(double delay, double doppler, const PhysicalGrid &grid);

} // namespace pce

#include <random>

template <class Rng>
double pce::sample_rice(Rng &rng, double noncentrality, double scale)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    const double re = noncentrality + scale * normal(rng);
    const double im = scale * normal(rng);
    return std::hypot(re, im);
}

#endif
