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

// Acceptance checks. Each criterion prints exactly one PASS or FAIL line.
//
//   pce_acceptance                    all criteria; the sweep runs in a temporary directory
//   pce_acceptance 1 3 4              selected criteria
//   pce_acceptance --sweep-dir DIR 7  criteria 6-9 read (and 9 reruns) the sweep stored in DIR
//   pce_acceptance --run-sweep DIR    run the evaluation sweep and write its report into DIR

#include "oracles.hpp"

#include "pce/harness.hpp"
#include "pce/io.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

using namespace pce;
namespace fs = std::filesystem;

namespace
{

struct Outcome
{
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char *f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---- 1: derivative series against central differences of the concentrated objective

Outcome gradient_correctness()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-pi, pi), jitter(-0.05, 0.05);
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::uint64_t s = 0; s < 16; ++s)
    {
        ScenarioConfig c;
        c.seed = 5000 + s;
        const Scenario sc = sample_scenario(c);
        auto obs = Observation::from_scenario(sc);
        ResidualState st(obs);
        std::vector<PathId> ids;
        for (std::size_t k = 0; k < sc.truth.size(); ++k)
            for (const PathParams &p : sc.truth[k])
            {
                Harmonics h = to_harmonics(p);
                for (std::size_t i = 0; i < 4; ++i)
                    h[i] = wrap_angle(h[i] + jitter(rng));
                ids.push_back(st.add_path(k, p.b, h));
            }
        const PathId id = ids[rng() % ids.size()];
        st.detach(id);
        for (Coordinate coord : all_coordinates)
        {
            const std::size_t ci = static_cast<std::size_t>(coord);
            const TrigSeries series = coordinate_series(st, id, coord);
            const Harmonics g = st.path(id).geometry;
            const double x = u(rng);
            auto f = [&](double v) {
                Harmonics h = g;
                h[ci] = v;
                return concentrated_objective(st, id, h);
            };
            // Richardson-extrapolated central difference
            const double h = 1e-4;
            const double d1 = (f(x + h) - f(x - h)) / (2 * h);
            const double d2 = (f(x + h / 2) - f(x - h / 2)) / h;
            const double numeric = (4.0 * d2 - d1) / 3.0;
            const double rel = std::abs(eval_series(series, x) - numeric) / std::abs(numeric);
            worst = std::max(worst, rel);
            ++cases;
        }
    }
    const double t = seconds_since(t0);
    return {cases >= 50 && worst <= 1e-5 && t < 120.0,
            fmt("%zu cases, worst relative error %.2e (limit 1e-5), %.1f s", cases, worst, t)};
}

// ---- 2: companion roots against a dense grid scan

// Horner evaluation of c_0 + 2 Re sum_{m>=1} c_m z^m, independent of the library's series code.
double hermitian_value(const std::vector<cd> &c, std::size_t M, double x)
{
    const cd z(std::cos(x), std::sin(x));
    cd acc = 0.0;
    for (std::size_t m = M; m >= 1; --m)
        acc = (acc + c[M + m]) * z;
    return c[M].real() + 2.0 * acc.real();
}

Outcome root_completeness()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(202);
    std::size_t missed = 0, extra = 0, total = 0, max_order = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < 100; ++i)
    {
        const std::size_t M = i < 10 ? 60 : 1 + rng() % 60;
        max_order = std::max(max_order, M);
        std::vector<cd> c = oracle::random_hermitian(rng, M);
        c[M] = std::normal_distribution<double>()(rng);
        TrigSeries s(M);
        s.coeffs = c;
        const RootSet found = unit_circle_roots(s);
        const std::vector<double> grid = oracle::grid_roots([&](double x) { return hermitian_value(c, M, x); });
        auto nearest = [](const std::vector<double> &set, double x) {
            double best = 1e300;
            for (double y : set)
                best = std::min(best, std::abs(wrap_angle(x - y)));
            return best;
        };
        for (double g : grid)
        {
            const double d = nearest(found.angles, g);
            worst = std::max(worst, d);
            missed += d > 1e-8;
        }
        for (double a : found.angles)
            extra += nearest(grid, a) > 1e-8;
        total += grid.size();
    }
    const double t = seconds_since(t0);
    return {missed == 0 && extra == 0 && t < 120.0,
            fmt("100 series up to order %zu, %zu grid roots, worst distance %.1e, %zu missed, %zu extra (limit "
                "1e-8), %.1f s",
                max_order, total, worst, missed, extra, t)};
}

// ---- 3: least-squares gain against the real normal equations

Outcome gain_solve()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> u(-pi, pi), jitter(-0.02, 0.02);
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::uint64_t s = 0; s < 10; ++s)
    {
        ScenarioConfig c;
        c.seed = 7000 + s;
        const Scenario sc = sample_scenario(c);
        ResidualState st(Observation::from_scenario(sc));
        std::vector<PathId> ids;
        for (std::size_t k = 0; k < sc.truth.size(); ++k)
            for (const PathParams &p : sc.truth[k])
                ids.push_back(st.add_path(k, p.b, to_harmonics(p)));
        const PathId id = ids[s % ids.size()];
        st.detach(id);
        const std::size_t user = st.path(id).user;
        const Harmonics truth_h = st.path(id).geometry;
        for (int i = 0; i < 100; ++i)
        {
            // half near the true geometry, half anywhere
            Harmonics h = truth_h;
            for (std::size_t j = 0; j < 4; ++j)
                h[j] = i % 2 ? u(rng) : wrap_angle(h[j] + jitter(rng));
            st.set_geometry(id, h);
            const cd b = solve_gain(st, id);
            const auto fit = oracle::normal_equation_fit(st.residual(), to_path_params(1.0, h), sc.pilots[user],
                                                         sc.config.N0);
            worst = std::max(worst, std::abs(b - fit.gain) / std::abs(fit.gain));
            ++cases;
        }
    }
    const double t = seconds_since(t0);
    return {cases >= 1000 && worst <= 1e-10 && t < 10.0,
            fmt("%zu instances, worst relative gain error %.2e (limit 1e-10), %.1f s", cases, worst, t)};
}

// ---- 4: noiseless single-path recovery

Outcome exact_recovery()
{
    const auto t0 = Clock::now();
    EstimatorConfig cfg;
    cfg.L_max = 1;
    std::size_t passed = 0, max_iterations = 0;
    double worst_phase = 0.0, worst_gain = 0.0;
    for (std::uint64_t s = 0; s < 32; ++s)
    {
        ScenarioConfig c;
        c.K = 1;
        c.L = {1};
        c.tx_powers = {-40.0};
        c.noiseless = true;
        c.seed = 9000 + s;
        const Scenario sc = sample_scenario(c);
        const EstimateResult r = estimate(sc, cfg);
        if (r.paths[0].size() != 1)
            continue;
        const Harmonics e = to_harmonics(r.paths[0][0]), t = to_harmonics(sc.truth[0][0]);
        double phase = 0.0;
        for (std::size_t i = 0; i < 4; ++i)
            phase = std::max(phase, std::abs(wrap_angle(e[i] - t[i])));
        const double gain = std::abs(std::abs(r.paths[0][0].b) - std::abs(sc.truth[0][0].b)) / std::abs(sc.truth[0][0].b);
        worst_phase = std::max(worst_phase, phase);
        worst_gain = std::max(worst_gain, gain);
        max_iterations = std::max(max_iterations, r.telemetry.inner_iterations);
        passed += phase <= 1e-6 && gain <= 1e-4 && r.telemetry.inner_iterations <= 30;
    }
    const double t = seconds_since(t0);
    return {passed == 32 && t < 60.0,
            fmt("%zu/32 recovered, worst phase error %.1e rad, worst gain error %.1e, at most %zu inner "
                "iterations, %.1f s",
                passed, worst_phase, worst_gain, max_iterations, t)};
}

// ---- 5: model order of a noiseless two-user scene

Outcome model_order()
{
    const auto t0 = Clock::now();
    EstimatorConfig cfg;
    cfg.gamma_aic = 12.0;
    std::size_t hits = 0;
    std::map<std::string, std::size_t> seen;
    for (std::uint64_t s = 0; s < 32; ++s)
    {
        ScenarioConfig c;
        c.tx_powers = {-30.0, -40.0};
        c.noiseless = true;
        c.seed = 11000 + s;
        const EstimateResult r = estimate(sample_scenario(c), cfg);
        hits += r.L_est == std::vector<std::size_t>{3, 3};
        ++seen[fmt("(%zu,%zu)", r.L_est[0], r.L_est[1])];
    }
    std::string hist;
    for (const auto &[k, v] : seen)
        hist += fmt(" %s x%zu", k.c_str(), v);
    const double t = seconds_since(t0);
    return {hits * 10 >= 32 * 9 && t < 1200.0,
            fmt("(3,3) in %zu/32 trials (need >= 90%%); orders:%s; %.1f s", hits, hist.c_str(), t)};
}

// ---- sweep-based criteria

SweepConfig evaluation_sweep()
{
    SweepConfig c = default_sweep_config();
    c.threads = 0;
    return c;
}

void run_and_report(const fs::path &dir)
{
    const auto t0 = Clock::now();
    const SweepConfig c = evaluation_sweep();
    std::size_t last = 0;
    const SweepResult r = run_sweep(c, [&](std::size_t done, std::size_t total) {
        if (done * 20 / total != last || done == total)
        {
            last = done * 20 / total;
            std::fprintf(stderr, "sweep: %zu/%zu trials, %.0f s\n", done, total, seconds_since(t0));
        }
    });
    report(r, dir.string());
}

double spearman(const std::vector<double> &x, const std::vector<double> &y)
{
    auto ranks = [](const std::vector<double> &v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();)
        {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]])
                ++j;
            for (std::size_t k = i; k <= j; ++k)
                r[idx[k]] = 0.5 * double(i + j) + 1.0;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> rx = ranks(x), ry = ranks(y);
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / double(rx.size());
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / double(ry.size());
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i)
    {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

std::size_t point_of(const SweepResult &r, double power)
{
    const auto &p = r.config.powers_dbw;
    const auto it = std::find(p.begin(), p.end(), power);
    if (it == p.end())
        throw Error(ErrorCode::invalid_argument, fmt("sweep has no point at %g dBW", power));
    return std::size_t(it - p.begin());
}

Outcome monotonicity(const SweepResult &r)
{
    double worst = 0.0;
    std::size_t updates = 0;
    for (const TrialRecord &t : r.trials)
    {
        worst = std::max(worst, t.worst_violation);
        updates += t.path_updates;
    }
    return {r.monotonicity_violations == 0 && r.failed_trials == 0,
            fmt("%zu trials, %zu path updates, %zu objective increases (largest %.2e), %zu failed trials",
                r.trials.size(), updates, r.monotonicity_violations, worst, r.failed_trials)};
}

Outcome mae_trend(const SweepResult &r)
{
    const PointStats &eq = r.at(point_of(r, -40.0), 0), &hi = r.at(point_of(r, -20.0), 0);
    const double f1 = eq.mae_mean[0] / hi.mae_mean[0], f2 = eq.mae_mean[1] / hi.mae_mean[1];
    // user 2: average over the points where user 1 is stronger against those where it is weaker
    bool degrades = true;
    std::string u2;
    for (std::size_t i : {0u, 1u})
    {
        double below = 0, above = 0;
        std::size_t nb = 0, na = 0;
        for (const PointStats &s : r.stats)
        {
            if (s.user != 1 || s.mae_trials == 0)
                continue;
            if (s.power_dbw < -40.0)
                below += s.mae_mean[i], ++nb;
            else if (s.power_dbw > -40.0)
                above += s.mae_mean[i], ++na;
        }
        below /= double(nb);
        above /= double(na);
        degrades = degrades && nb > 0 && na > 0 && above > below;
        u2 += fmt("; user 2 %s mean %.2e above vs %.2e below -40 dBW", error_names[i], above, below);
    }
    return {f1 >= 3.0 && f2 >= 3.0 && degrades,
            fmt("user 1 MAE ratio (-40 vs -20 dBW) omega1 %.2f, omega2 %.2f (need >= 3)%s", f1, f2, u2.c_str())};
}

Outcome f1_trend(const SweepResult &r)
{
    std::vector<double> p, f1, f2;
    for (const PointStats &s : r.stats)
    {
        if (s.user == 0)
        {
            p.push_back(s.power_dbw);
            f1.push_back(s.f1_mean);
        }
        else if (s.user == 1)
            f2.push_back(s.f1_mean);
    }
    const double rho = spearman(p, f1);
    // last upward crossing of user 1 over user 2, linearly interpolated
    double crossing = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
    {
        const double d0 = f1[i] - f2[i], d1 = f1[i + 1] - f2[i + 1];
        if (d0 < 0.0 && d1 >= 0.0)
            crossing = p[i] + (p[i + 1] - p[i]) * (-d0) / (d1 - d0);
    }
    const bool near = !std::isnan(crossing) && std::abs(crossing + 40.0) <= 6.0;
    return {rho > 0.8 && near,
            fmt("user 1 F1 Spearman rho %.3f (need > 0.8), F1 %.3f -> %.3f; curves cross at %.1f dBW (need -46..-34)",
                rho, f1.front(), f1.back(), crossing)};
}

std::string read_file(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io, "cannot open " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism(const fs::path &dir)
{
    const auto t0 = Clock::now();
    const SweepConfig c = load_config((dir / "manifest.json").string());
    const std::string again = csv_text(run_sweep(c));
    const std::string stored = read_file(dir / "sweep.csv");
    return {again == stored, fmt("rerun from manifest: %zu bytes, %s, %.0f s", again.size(),
                                 again == stored ? "byte-identical" : "DIFFERENT", seconds_since(t0))};
}

const char *names[] = {"",
                       "gradient correctness",
                       "root completeness",
                       "gain solve",
                       "exact recovery",
                       "model order",
                       "monotonicity",
                       "MAE trend",
                       "F1 trend",
                       "determinism"};

} // namespace

int main(int argc, char **argv)
{
    std::vector<int> wanted;
    fs::path sweep_dir;
    for (int i = 1; i < argc; ++i)
    {
        if (!std::strcmp(argv[i], "--run-sweep") && i + 1 < argc)
        {
            run_and_report(argv[++i]);
            return 0;
        }
        if (!std::strcmp(argv[i], "--sweep-dir") && i + 1 < argc)
            sweep_dir = argv[++i];
        else
        {
            const int n = std::atoi(argv[i]);
            if (n < 1 || n > 9)
            {
                std::fprintf(stderr, "usage: %s [--sweep-dir DIR] [criterion 1-9 ...] | --run-sweep DIR\n", argv[0]);
                return 2;
            }
            wanted.push_back(n);
        }
    }
    if (wanted.empty())
        wanted = {1, 2, 3, 4, 5, 6, 7, 8, 9};

    bool temp_dir = false;
    std::optional<SweepResult> sweep;
    auto need_sweep = [&]() -> const SweepResult & {
        if (!sweep)
        {
            if (sweep_dir.empty())
            {
                sweep_dir = fs::temp_directory_path() / fmt("pce_acceptance_%ld", long(std::time(nullptr)));
                temp_dir = true;
            }
            if (!fs::exists(sweep_dir / "sweep_result.json"))
                run_and_report(sweep_dir);
            sweep = load_sweep((sweep_dir / "sweep_result.json").string());
        }
        return *sweep;
    };

    bool all = true;
    for (int n : wanted)
    {
        Outcome o;
        try
        {
            switch (n)
            {
            case 1: o = gradient_correctness(); break;
            case 2: o = root_completeness(); break;
            case 3: o = gain_solve(); break;
            case 4: o = exact_recovery(); break;
            case 5: o = model_order(); break;
            case 6: o = monotonicity(need_sweep()); break;
            case 7: o = mae_trend(need_sweep()); break;
            case 8: o = f1_trend(need_sweep()); break;
            case 9: need_sweep(); o = determinism(sweep_dir); break;
            }
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("error: ") + e.what()};
        }
        std::printf("criterion %d %s  %s: %s\n", n, o.pass ? "PASS" : "FAIL", names[n], o.detail.c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    if (temp_dir)
        fs::remove_all(sweep_dir);
    return all ? 0 : 1;
}
