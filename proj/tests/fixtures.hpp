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

#ifndef PCE_TESTS_FIXTURES_HPP
#define PCE_TESTS_FIXTURES_HPP

#include "pce/likelihood.hpp"
#include "pce/model.hpp"

#include <memory>
#include <random>

namespace fixture
{

inline pce::ScenarioConfig config(std::uint64_t seed, std::size_t K = 2, std::size_t L = 3, bool noiseless = false)
{
    pce::ScenarioConfig c;
    c.K = K;
    c.L.assign(K, L);
    c.tx_powers.assign(K, -40.0);
    c.seed = seed;
    c.noiseless = noiseless;
    return c;
}

inline pce::ScenarioConfig small_config(std::uint64_t seed, std::size_t K = 1, std::size_t L = 1)
{
    pce::ScenarioConfig c = config(seed, K, L);
    c.dims = {8, 6, 5, 3};
    return c;
}

// A state holding every true path of a scenario (perturbed by `jitter` rad), with path `detached` removed
// from the residual.
struct DetachedState
{
    std::shared_ptr<const pce::Observation> obs;
    std::unique_ptr<pce::ResidualState> state;
    std::vector<pce::PathId> ids;
};

inline DetachedState state_from_truth(const pce::Scenario &sc, std::size_t detached = 0, double jitter = 0.0,
                                      std::uint64_t seed = 7)
{
    DetachedState d;
    d.obs = pce::Observation::from_scenario(sc);
    d.state = std::make_unique<pce::ResidualState>(d.obs);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-jitter, jitter);
    for (std::size_t k = 0; k < sc.truth.size(); ++k)
        for (const auto &p : sc.truth[k])
        {
            pce::Harmonics h = pce::to_harmonics(p);
            for (std::size_t i = 0; i < 4; ++i)
                h[i] = pce::wrap_angle(h[i] + u(rng));
            d.ids.push_back(d.state->add_path(k, p.b, h));
        }
    if (detached < d.ids.size())
        d.state->detach(d.ids[detached]);
    return d;
}

} // namespace fixture

#endif
