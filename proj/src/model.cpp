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

#include "pce/model.hpp"

#include "signal.hpp"

#include <algorithm>
#include <random>

namespace pce
{

const char *coordinate_name(Coordinate c)
{
    switch (c)
    {
    case Coordinate::omega1:
        return "omega1";
    case Coordinate::omega2:
        return "omega2";
    case Coordinate::psi:
        return "psi";
    case Coordinate::chi:
        return "chi";
    }
    return "?";
}

double phase_to_angle(double phase)
{
    const double s = std::clamp(phase / pi, -1.0, 1.0);
    double a = std::asin(s);
    // +-pi maps onto the excluded endpoints; step back inside the open interval.
    const double edge = pi / 2.0;
    if (a >= edge)
        a = std::nextafter(edge, 0.0);
    else if (a <= -edge)
        a = std::nextafter(-edge, 0.0);
    return a;
}

Harmonics to_harmonics(const PathParams &p)
{
    return {p.omega1, p.omega2, -pi * std::sin(p.phi), pi * std::sin(p.theta)};
}

PathParams to_path_params(cd gain, const Harmonics &h)
{
    return {gain, wrap_angle(h.omega1), wrap_angle(h.omega2), phase_to_angle(-wrap_angle(h.psi)),
            phase_to_angle(wrap_angle(h.chi))};
}

void ScenarioConfig::validate() const
{
    if (K == 0)
        throw Error(ErrorCode::invalid_argument, "K must be at least 1");
    if (L.size() != K)
        throw Error(ErrorCode::invalid_argument, "L must have one entry per user");
    if (tx_powers.size() != K)
        throw Error(ErrorCode::invalid_argument, "tx_powers must have one entry per user");
    if (dims.Nc == 0 || dims.Ns == 0 || dims.Nr == 0 || dims.Nt == 0)
        throw Error(ErrorCode::invalid_argument, "all dimensions must be at least 1");
    if (!(N0 > 0.0) || !std::isfinite(N0))
        throw Error(ErrorCode::invalid_argument, "N0 must be positive");
    if (!(rice_noncentrality >= 0.0) || !(rice_scale >= 0.0))
        throw Error(ErrorCode::invalid_argument, "Rice parameters must be non-negative");
    if (!(los_boost > 0.0))
        throw Error(ErrorCode::invalid_argument, "los_boost must be positive");
    for (double p : tx_powers)
        if (!std::isfinite(p))
            throw Error(ErrorCode::invalid_argument, "tx power must be finite");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double dbw_to_watts(double dbw) { return std::pow(10.0, dbw / 10.0); }

std::vector<cd> steering(double angle, std::size_t N) { return detail::phase_ramp(-pi * std::sin(angle), N); }

static void check_pilots(std::span<const PilotTensor> pilots, std::size_t users, const Dims &dims)
{
    if (pilots.size() < users)
        throw Error(ErrorCode::dimension_mismatch, "missing pilot tensor for a user");
    for (const auto &x : pilots)
        if (x.dim0() != dims.Nc || x.dim1() != dims.Ns || x.dim2() != dims.Nt)
            throw Error(ErrorCode::dimension_mismatch, "pilot tensor shape does not match (Nc, Ns, Nt)");
}

ReceivedTensor synthesize_mean(const Channels &channels, std::span<const PilotTensor> pilots, const Dims &dims)
{
    check_pilots(pilots, channels.size(), dims);
    ReceivedTensor mean(dims.Nc, dims.Ns, dims.Nr);
    for (std::size_t k = 0; k < channels.size(); ++k)
        for (const PathParams &p : channels[k])
            detail::write_path(mean, p.b, to_harmonics(p), pilots[k], true);
    return mean;
}

ReceivedTensor synthesize_received(const Channels &channels, std::span<const PilotTensor> pilots, const Dims &dims,
                                   double N0, std::uint64_t noise_seed)
{
    if (!(N0 >= 0.0))
        throw Error(ErrorCode::invalid_argument, "N0 must be non-negative");
    ReceivedTensor y = synthesize_mean(channels, pilots, dims);
    if (N0 == 0.0)
        return y;
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(N0 / 2.0));
    for (cd &v : y.values())
    {
        const double re = normal(rng);
        const double im = normal(rng);
        v += cd(re, im);
    }
    return y;
}

PilotTensor generate_isotropic_pilots(const Dims &dims, double power_dbw, std::uint64_t seed)
{
    if (dims.Nt == 0)
        throw Error(ErrorCode::invalid_argument, "Nt must be at least 1");
    const double amplitude = std::sqrt(dbw_to_watts(power_dbw));
    PilotTensor x(dims.Nc, dims.Ns, dims.Nt);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> antenna(0, dims.Nt - 1);
    std::uniform_real_distribution<double> phase(-pi, pi);
    for (std::size_t n = 0; n < dims.Nc; ++n)
        for (std::size_t t = 0; t < dims.Ns; ++t)
        {
            // The active antenna is drawn at random: any affine pattern such as (n + t) mod Nt lets a
            // shift of chi by 2pi/Nt be absorbed into omega1 and omega2, leaving theta unidentifiable.
            const std::size_t v = antenna(rng);
            x(n, t, v) = std::polar(amplitude, phase(rng));
        }
    return x;
}

double check_isotropy(const PilotTensor &pilots, std::span<const double> theta_grid)
{
    if (theta_grid.empty())
        throw Error(ErrorCode::invalid_argument, "empty theta grid");
    std::vector<double> S;
    S.reserve(theta_grid.size());
    for (double theta : theta_grid)
    {
        const std::vector<cd> s = detail::beamformed_pilots(pilots, pi * std::sin(theta));
        double acc = 0.0;
        for (const cd &v : s)
            acc += std::norm(v);
        S.push_back(acc);
    }
    double mean = 0.0;
    for (double v : S)
        mean += v;
    mean /= static_cast<double>(S.size());
    if (!(mean > 0.0))
        throw Error(ErrorCode::degenerate, "pilots carry no power");
    double worst = 0.0;
    for (double v : S)
        worst = std::max(worst, std::abs(v - mean) / mean);
    return worst;
}

double check_isotropy(const PilotTensor &pilots)
{
    constexpr std::size_t points = 128;
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = -pi / 2.0 + pi * (static_cast<double>(i) + 0.5) / points;
    return check_isotropy(pilots, grid);
}

namespace
{

// Uniform draw strictly inside (lo, hi).
double open_uniform(std::mt19937_64 &rng, double lo, double hi)
{
    std::uniform_real_distribution<double> d(lo, hi);
    double v = d(rng);
    while (v <= lo || v >= hi)
        v = d(rng);
    return v;
}

} // namespace

Scenario build_scenario(const ScenarioConfig &config, Channels truth)
{
    config.validate();
    Scenario sc;
    sc.config = config;
    sc.truth = std::move(truth);
    for (std::size_t k = 0; k < config.K; ++k)
        sc.pilots.push_back(generate_isotropic_pilots(config.dims, config.tx_powers[k], derive_seed(config.seed, 100 + k)));
    sc.noise_seed = derive_seed(config.seed, 2);
    sc.received = synthesize_received(sc.truth, sc.pilots, config.dims, config.noiseless ? 0.0 : config.N0, sc.noise_seed);
    return sc;
}

Scenario sample_scenario(const ScenarioConfig &config)
{
    config.validate();
    std::mt19937_64 rng(derive_seed(config.seed, 1));
    Channels truth(config.K);
    for (std::size_t k = 0; k < config.K; ++k)
    {
        auto &paths = truth[k];
        for (std::size_t l = 0; l < config.L[k]; ++l)
        {
            PathParams p;
            p.omega1 = open_uniform(rng, -pi, pi);
            p.omega2 = open_uniform(rng, -pi, pi);
            p.phi = open_uniform(rng, -pi / 2.0, pi / 2.0);
            p.theta = open_uniform(rng, -pi / 2.0, pi / 2.0);
            const double phase = open_uniform(rng, -pi, pi);
            const double mag = sample_rice(rng, config.rice_noncentrality, config.rice_scale);
            p.b = std::polar(mag, phase);
            paths.push_back(p);
        }
        if (!paths.empty())
        {
            auto strongest = std::max_element(paths.begin(), paths.end(),
                                              [](const PathParams &a, const PathParams &b) { return std::abs(a.b) < std::abs(b.b); });
            strongest->b *= config.los_boost;
        }
    }
    return build_scenario(config, std::move(truth));
}

std::pair<double, double> omega_to_physical(double omega1, double omega2, const PhysicalGrid &grid)
{
    return {-omega1 / (2.0 * pi * grid.f_scs), omega2 / (2.0 * pi * grid.Ts)};
}

std::pair<double, double> physical_to_omega(double delay, double doppler, const PhysicalGrid &grid)
{
    return {-2.0 * pi * delay * grid.f_scs, 2.0 * pi * doppler * grid.Ts};
}

} // namespace pce
