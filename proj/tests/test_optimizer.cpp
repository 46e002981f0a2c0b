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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fixtures.hpp"

#include "pce/optimizer.hpp"

#include <algorithm>

using namespace pce;

namespace
{

ScenarioConfig single_path(std::uint64_t seed, bool noiseless = true)
{
    ScenarioConfig c = fixture::config(seed, 1, 1, noiseless);
    c.tx_powers = {-30.0};
    return c;
}

double angle_gap(double a, double b) { return std::abs(wrap_angle(a - b)); }

} // namespace

TEST_CASE("momentum_candidate examples")
{
    CHECK(momentum_candidate(0.7, 0.2, -0.4, 0.0) == 0.7);
    CHECK(momentum_candidate(0.7, 0.2, 0.2, 0.4) == 0.7);
    CHECK(momentum_candidate(1.0, 0.5, 0.3, 0.1) == doctest::Approx(1.02).epsilon(1e-14));
    // the difference is taken along the short arc
    CHECK(momentum_candidate(0.0, pi - 0.05, -pi + 0.05, 1.0) == doctest::Approx(-0.1).epsilon(1e-12));
}

TEST_CASE("relaxed_update examples")
{
    CHECK(relaxed_update(0.3, -1.2, 1.0) == doctest::Approx(-1.2).epsilon(1e-15));
    CHECK(relaxed_update(0.0, 1.0, 1.05) == doctest::Approx(1.05).epsilon(1e-15));
    const double wrapped = relaxed_update(0.0, pi - 0.01, 1.05);
    CHECK(wrapped == doctest::Approx(1.05 * (pi - 0.01) - 2.0 * pi).epsilon(1e-13));
    CHECK(wrapped > -pi);
    // across the branch cut the step still overshoots by rho along the short arc
    CHECK(relaxed_update(pi - 0.1, -pi + 0.1, 1.5) == doctest::Approx(-pi + 0.2).epsilon(1e-12));
}

TEST_CASE("EstimatorConfig validation and schedules")
{
    EstimatorConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.schedule(2) == std::vector<std::size_t>{0, 1, 0, 1, 0, 1});
    c.user_schedule = {1, 1, 0};
    CHECK(c.schedule(2) == std::vector<std::size_t>{1, 1, 0});
    CHECK_THROWS_AS(c.schedule(1), Error);
    for (auto bad : std::initializer_list<void (*)(EstimatorConfig &)>{
             [](EstimatorConfig &e) { e.rho = 0.0; }, [](EstimatorConfig &e) { e.rho = 2.0; },
             [](EstimatorConfig &e) { e.eta0 = -0.1; }, [](EstimatorConfig &e) { e.it_max = 0; },
             [](EstimatorConfig &e) { e.L_max = 0; }, [](EstimatorConfig &e) { e.gamma_aic = -1.0; },
             [](EstimatorConfig &e) { e.radial_tol = 0.0; }})
    {
        EstimatorConfig e;
        bad(e);
        CHECK_THROWS_AS(e.validate(), Error);
    }
}

TEST_CASE("non-isotropic pilots are rejected up front")
{
    PilotTensor x(6, 4, 3);
    for (cd &v : x.values())
        v = 1.0;
    auto obs = std::make_shared<const Observation>(Tensor3(6, 4, 5), std::vector<PilotTensor>{x}, 1.0);
    try
    {
        Estimator e(obs, EstimatorConfig{});
        FAIL("expected rejection");
    }
    catch (const Error &err)
    {
        CHECK(err.code() == ErrorCode::not_isotropic);
    }
}

TEST_CASE("update_path at the exact optimum is a fixed point")
{
    const Scenario sc = sample_scenario(single_path(3));
    Estimator est(Observation::from_scenario(sc), EstimatorConfig{});
    PathSlot &slot = est.add_path(0, sc.truth[0][0]);
    const UpdateReport rep = est.update_path(slot);
    CHECK_FALSE(rep.failed);
    CHECK(std::abs(rep.improvement) <= 1e-9);
    CHECK(rep.max_relative_change <= 1e-10);
}

TEST_CASE("plain exact step leaves the last coordinate stationary")
{
    EstimatorConfig cfg;
    cfg.rho = 1.0;
    cfg.eta0 = 0.0;
    const Scenario sc = sample_scenario(fixture::config(12));
    for (std::size_t which = 0; which < 3; ++which)
    {
        Estimator est(Observation::from_scenario(sc), cfg);
        std::mt19937_64 rng(which);
        std::uniform_real_distribution<double> u(-0.05, 0.05);
        std::vector<PathSlot *> slots;
        for (std::size_t k = 0; k < 2; ++k)
            for (PathParams p : sc.truth[k])
            {
                p.omega1 = wrap_angle(p.omega1 + u(rng));
                p.omega2 = wrap_angle(p.omega2 + u(rng));
                est.add_path(k, p);
            }
        PathSlot &slot = est.slots(0)[which];
        const UpdateReport rep = est.update_path(slot);
        REQUIRE_FALSE(rep.failed);
        CHECK(rep.fallbacks == 0);
        est.state().detach(slot.id);
        const TrigSeries s = series_sintheta(est.state(), slot.id);
        const double chi = est.state().path(slot.id).geometry.chi;
        CHECK(std::abs(eval_series(s, chi)) <= 1e-6 * s.l1_norm());
        est.state().attach(slot.id);
    }
}

TEST_CASE("single-path problem from a random start in the main lobe converges within it_max updates")
{
    const EstimatorConfig cfg;
    for (std::uint64_t seed = 0; seed < 8; ++seed)
    {
        const Scenario sc = sample_scenario(single_path(100 + seed));
        const Dims &d = sc.config.dims;
        Estimator est(Observation::from_scenario(sc), cfg);
        std::mt19937_64 rng(seed);
        // uniform within half a Fourier resolution cell of the truth in every coordinate
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        Harmonics h = to_harmonics(sc.truth[0][0]);
        h.omega1 = wrap_angle(h.omega1 + u(rng) * 2.0 * pi / double(d.Nc));
        h.omega2 = wrap_angle(h.omega2 + u(rng) * 2.0 * pi / double(d.Ns));
        h.psi = wrap_angle(h.psi + u(rng) * 2.0 * pi / double(d.Nr));
        h.chi = wrap_angle(h.chi + u(rng) * 2.0 * pi / double(d.Nt));
        PathSlot &slot = est.add_path(0, to_path_params(sc.truth[0][0].b * 0.5, h));
        // the starting gain is refit first so the objective reflects the geometry alone
        est.state().detach(slot.id);
        est.state().set_path(slot.id, solve_gain(est.state(), slot.id), est.state().path(slot.id).geometry);
        const double initial = est.state().objective();
        for (std::size_t i = 0; i < cfg.it_max && est.state().objective() > 1e-6 * initial; ++i)
            est.update_path(slot);
        CHECK(est.state().objective() <= 1e-6 * initial);
    }
}

TEST_CASE("update_path never increases the objective")
{
    const Scenario sc = sample_scenario(fixture::config(21));
    Estimator est(Observation::from_scenario(sc), EstimatorConfig{});
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (std::size_t k = 0; k < 2; ++k)
        for (PathParams p : sc.truth[k])
        {
            p.omega1 = wrap_angle(p.omega1 + u(rng));
            p.omega2 = wrap_angle(p.omega2 + u(rng));
            p.phi += 0.3 * u(rng);
            est.add_path(k, p);
        }
    for (int sweep = 0; sweep < 6; ++sweep)
        for (std::size_t k = 0; k < 2; ++k)
            for (PathSlot &slot : est.slots(k))
            {
                const UpdateReport rep = est.update_path(slot);
                CHECK(rep.objective_after <= rep.objective_before);
                CHECK(rep.objective_after == est.state().objective());
            }
    CHECK(est.telemetry().monotonicity_violations == 0);
    CHECK(est.state().objective() == doctest::Approx(est.state().recomputed_objective()).epsilon(1e-9));
}

TEST_CASE("aic_user examples")
{
    ScenarioConfig c = fixture::config(5, 1, 2, true);
    const Scenario sc = sample_scenario(c);
    EstimatorConfig cfg;
    cfg.gamma_aic = 12.0;
    Estimator est(Observation::from_scenario(sc), cfg);
    for (const PathParams &p : sc.truth[0])
        est.add_path(0, p);
    CHECK(est.aic_user(0, 2) == doctest::Approx(24.0).epsilon(1e-9));
    CHECK(est.aic_user(0, 1) > est.aic_user(0, 2));
    CHECK_THROWS_AS(est.aic_user(0, 3), Error);
}

TEST_CASE("aic_user with no penalty is nonincreasing in L")
{
    EstimatorConfig cfg;
    cfg.gamma_aic = 0.0;
    cfg.L_max = 5;
    cfg.m_aic_max = 5;
    const Scenario sc = sample_scenario(fixture::config(31, 1, 3));
    Estimator est(Observation::from_scenario(sc), cfg);
    est.estimate_user(0);
    REQUIRE(est.slots(0).size() == 5);
    for (std::size_t L = 1; L <= 5; ++L)
        CHECK(est.aic_user(0, L) <= est.aic_user(0, L - 1));
}

TEST_CASE("noiseless three-path user: AIC argmin is three")
{
    EstimatorConfig cfg;
    cfg.L_max = 5;
    cfg.m_aic_max = 5;
    for (std::uint64_t seed = 40; seed < 43; ++seed)
    {
        ScenarioConfig c = fixture::config(seed, 1, 3, true);
        c.tx_powers = {-20.0};
        const Scenario sc = sample_scenario(c);
        Estimator est(Observation::from_scenario(sc), cfg);
        est.estimate_user(0);
        REQUIRE(est.slots(0).size() == 5);
        std::size_t best = 1;
        for (std::size_t L = 2; L <= 5; ++L)
            if (est.aic_user(0, L) < est.aic_user(0, best))
                best = L;
        CHECK(best == 3);
        CHECK(est.select_model_order() == std::vector<std::size_t>{3});
    }
}

TEST_CASE("select_model_order for one user is the argmin of aic_user")
{
    EstimatorConfig cfg;
    cfg.m_aic_max = 6;
    const Scenario sc = sample_scenario(fixture::config(9, 1, 3));
    Estimator est(Observation::from_scenario(sc), cfg);
    est.estimate_user(0);
    const std::size_t stored = est.slots(0).size();
    std::size_t best = 1;
    for (std::size_t L = 2; L <= stored; ++L)
        if (est.aic_user(0, L) < est.aic_user(0, best))
            best = L;
    CHECK(est.select_model_order() == std::vector<std::size_t>{best});
}

TEST_CASE("a huge AIC penalty keeps exactly one path")
{
    EstimatorConfig cfg;
    cfg.gamma_aic = 1e12;
    const Scenario sc = sample_scenario(fixture::config(2));
    const EstimateResult r = estimate(sc, cfg);
    REQUIRE(r.L_est.size() == 2);
    for (std::size_t k = 0; k < 2; ++k)
    {
        CHECK(r.L_est[k] == 1);
        CHECK(r.paths[k].size() == 1 + cfg.m_aic_max);
        CHECK(r.selected()[k].size() == 1);
    }
}

TEST_CASE("L_max = 1 recovers a noiseless single path")
{
    EstimatorConfig cfg;
    cfg.L_max = 1;
    for (std::uint64_t seed = 0; seed < 3; ++seed)
    {
        const Scenario sc = sample_scenario(single_path(60 + seed));
        const EstimateResult r = estimate(sc, cfg);
        REQUIRE(r.paths[0].size() == 1);
        const PathParams &e = r.paths[0][0], &t = sc.truth[0][0];
        CHECK(angle_gap(e.omega1, t.omega1) <= 1e-6);
        CHECK(angle_gap(e.omega2, t.omega2) <= 1e-6);
        CHECK(std::abs(e.phi - t.phi) <= 1e-6);
        CHECK(std::abs(e.theta - t.theta) <= 1e-6);
        CHECK(std::abs(std::abs(e.b) - std::abs(t.b)) <= 1e-4 * std::abs(t.b));
        CHECK(r.L_est == std::vector<std::size_t>{1});
    }
}

TEST_CASE("estimate is deterministic and symmetric under user relabeling")
{
    EstimatorConfig cfg;
    cfg.L_max = 4;
    ScenarioConfig c = fixture::config(14);
    c.dims = {16, 8, 8, 4};
    c.tx_powers = {-34.0, -40.0};
    const Scenario sc = sample_scenario(c);
    const EstimateResult a = estimate(sc, cfg);
    const EstimateResult again = estimate(sc, cfg);
    CHECK(a.L_est == again.L_est);
    CHECK(a.objective == again.objective);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < a.paths[k].size(); ++i)
        {
            CHECK(a.paths[k][i].b == again.paths[k][i].b);
            CHECK(a.paths[k][i].omega1 == again.paths[k][i].omega1);
        }

    Scenario swapped = sc;
    std::swap(swapped.pilots[0], swapped.pilots[1]);
    std::swap(swapped.truth[0], swapped.truth[1]);
    EstimatorConfig cfg_swapped = cfg;
    cfg_swapped.user_schedule = {1, 0, 1, 0, 1, 0};
    const EstimateResult b = estimate(swapped, cfg_swapped);
    REQUIRE(b.L_est.size() == 2);
    CHECK(b.L_est[0] == a.L_est[1]);
    CHECK(b.L_est[1] == a.L_est[0]);
    CHECK(b.objective == doctest::Approx(a.objective).epsilon(1e-12));
    for (std::size_t k = 0; k < 2; ++k)
    {
        REQUIRE(b.paths[1 - k].size() == a.paths[k].size());
        for (std::size_t i = 0; i < a.paths[k].size(); ++i)
        {
            CHECK(std::abs(b.paths[1 - k][i].b - a.paths[k][i].b) <= 1e-9 * std::abs(a.paths[k][i].b));
            CHECK(angle_gap(b.paths[1 - k][i].omega1, a.paths[k][i].omega1) <= 1e-9);
            CHECK(std::abs(b.paths[1 - k][i].theta - a.paths[k][i].theta) <= 1e-9);
        }
    }
}

TEST_CASE("estimate telemetry is consistent")
{
    EstimatorConfig cfg;
    cfg.stop_at_optimality = false;
    cfg.user_schedule = {0, 1};
    const Scenario sc = sample_scenario(fixture::config(33));
    const EstimateResult r = estimate(sc, cfg);
    CHECK(r.telemetry.user_visits == 2);
    CHECK(r.telemetry.objective_trace.size() == 2);
    CHECK(r.telemetry.monotonicity_violations == 0);
    CHECK(r.telemetry.failed_updates == 0);
    std::size_t stored = 0;
    for (std::size_t k = 0; k < 2; ++k)
    {
        stored += r.paths[k].size();
        CHECK(r.paths[k].size() <= cfg.L_max);
        CHECK(r.L_est[k] >= 1);
        CHECK(r.L_est[k] <= r.paths[k].size());
        for (std::size_t i = 1; i < r.paths[k].size(); ++i)
            CHECK(std::abs(r.paths[k][i - 1].b) >= std::abs(r.paths[k][i].b));
    }
    CHECK(r.telemetry.paths_added == stored);
}
