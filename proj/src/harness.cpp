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
#include "pce/harness.hpp"

#include "pce/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace pce
{

double match_cost(const PathParams &t, const PathParams &e)
{
    return std::abs(wrap_angle(t.omega1 - e.omega1)) + std::abs(wrap_angle(t.omega2 - e.omega2)) +
           std::abs(wrap_angle(pi * std::sin(t.phi) - pi * std::sin(e.phi))) +
           std::abs(wrap_angle(pi * std::sin(t.theta) - pi * std::sin(e.theta)));
}

PathError path_error(const PathParams &t, const PathParams &e)
{
    PathError err;
    err.omega1 = std::abs(wrap_angle(t.omega1 - e.omega1));
    err.omega2 = std::abs(wrap_angle(t.omega2 - e.omega2));
    err.phi = std::abs(wrap_angle(t.phi - e.phi));
    err.theta = std::abs(wrap_angle(t.theta - e.theta));
    err.gain = std::abs(std::abs(e.b) - std::abs(t.b)) / std::abs(t.b);
    return err;
}

MatchResult match_paths(std::span<const PathParams> truth, std::span<const PathParams> estimates, double threshold)
{
    if (!(threshold > 0.0))
        throw Error(ErrorCode::invalid_argument, "match threshold must be positive");
    MatchResult m;
    m.truth_count = truth.size();
    m.estimate_count = estimates.size();

    // Exact assignment by dynamic programming over subsets of the smaller side.
    const bool flip = estimates.size() > truth.size();
    const std::size_t R = flip ? estimates.size() : truth.size(); // rows, iterated
    const std::size_t C = flip ? truth.size() : estimates.size(); // columns, subset-encoded
    if (C > 20)
        throw Error(ErrorCode::invalid_argument, "too many paths for exact matching");
    auto cost = [&](std::size_t r, std::size_t c) {
        return flip ? match_cost(truth[c], estimates[r]) : match_cost(truth[r], estimates[c]);
    };

    struct Score
    {
        std::size_t count = 0;
        double total = 0.0;
        bool better(const Score &o) const { return count > o.count || (count == o.count && total < o.total); }
    };
    const std::size_t S = std::size_t{1} << C;
    // best[r][mask]: best score using rows r.. with columns in mask already taken.
    std::vector<std::vector<Score>> best(R + 1, std::vector<Score>(S));
    std::vector<std::vector<int>> choice(R, std::vector<int>(S, -1));
    for (std::size_t r = R; r-- > 0;)
        for (std::size_t mask = 0; mask < S; ++mask)
        {
            Score b = best[r + 1][mask];
            int pick = -1;
            for (std::size_t c = 0; c < C; ++c)
            {
                if (mask & (std::size_t{1} << c))
                    continue;
                const double k = cost(r, c);
                if (!(k <= threshold))
                    continue;
                Score s = best[r + 1][mask | (std::size_t{1} << c)];
                s.count += 1;
                s.total += k;
                if (s.better(b))
                {
                    b = s;
                    pick = static_cast<int>(c);
                }
            }
            best[r][mask] = b;
            choice[r][mask] = pick;
        }

    std::vector<long> truth_to_est(truth.size(), -1);
    std::size_t mask = 0;
    for (std::size_t r = 0; r < R; ++r)
    {
        const int c = choice[r][mask];
        if (c < 0)
            continue;
        mask |= std::size_t{1} << c;
        if (flip)
            truth_to_est[static_cast<std::size_t>(c)] = static_cast<long>(r);
        else
            truth_to_est[r] = c;
    }
    std::vector<bool> used(estimates.size(), false);
    for (std::size_t t = 0; t < truth.size(); ++t)
    {
        if (truth_to_est[t] < 0)
        {
            m.unmatched_truth.push_back(t);
            continue;
        }
        const std::size_t e = static_cast<std::size_t>(truth_to_est[t]);
        used[e] = true;
        m.pairs.emplace_back(t, e);
        m.errors.push_back(path_error(truth[t], estimates[e]));
    }
    for (std::size_t e = 0; e < estimates.size(); ++e)
        if (!used[e])
            m.unmatched_estimates.push_back(e);
    return m;
}

double f1_score(const MatchResult &m)
{
    if (m.truth_count == 0 && m.estimate_count == 0)
        return 1.0;
    if (m.pairs.empty())
        return 0.0;
    const double tp = static_cast<double>(m.pairs.size());
    const double precision = tp / static_cast<double>(m.estimate_count);
    const double recall = tp / static_cast<double>(m.truth_count);
    return 2.0 * precision * recall / (precision + recall);
}

std::optional<PathError> mae(const MatchResult &m)
{
    if (m.errors.empty())
        return std::nullopt;
    std::array<double, 5> acc{};
    for (const PathError &e : m.errors)
    {
        const auto v = e.values();
        for (std::size_t i = 0; i < 5; ++i)
            acc[i] += v[i];
    }
    const double n = static_cast<double>(m.errors.size());
    return PathError{acc[0] / n, acc[1] / n, acc[2] / n, acc[3] / n, acc[4] / n};
}

void SweepConfig::validate() const
{
    scenario.validate();
    estimator.validate();
    if (powers_dbw.empty())
        throw Error(ErrorCode::invalid_argument, "sweep needs at least one power point");
    if (swept_user >= scenario.K)
        throw Error(ErrorCode::invalid_argument, "swept user out of range");
    if (trials < 1)
        throw Error(ErrorCode::invalid_argument, "sweep needs at least one trial");
    if (!(match_threshold > 0.0))
        throw Error(ErrorCode::invalid_argument, "match threshold must be positive");
    for (double p : powers_dbw)
        if (!std::isfinite(p))
            throw Error(ErrorCode::invalid_argument, "power points must be finite");
}

std::vector<double> SweepConfig::default_powers()
{
    std::vector<double> p;
    for (int dbw = -60; dbw <= -20; dbw += 2)
        p.push_back(dbw);
    return p;
}

std::uint64_t SweepConfig::trial_seed(std::size_t trial) const { return derive_seed(master_seed, trial); }

ScenarioConfig SweepConfig::point_scenario(std::size_t point, std::size_t trial) const
{
    ScenarioConfig c = scenario;
    c.tx_powers.at(swept_user) = powers_dbw.at(point);
    c.seed = trial_seed(trial);
    return c;
}

SweepConfig default_sweep_config()
{
    SweepConfig c;
    c.powers_dbw = SweepConfig::default_powers();
    return c;
}

TrialRecord run_trial(const SweepConfig &config, std::size_t point, std::size_t trial)
{
    TrialRecord rec;
    rec.point = point;
    rec.trial = trial;
    rec.seed = config.trial_seed(trial);
    try
    {
        const Scenario sc = sample_scenario(config.point_scenario(point, trial));
        const EstimateResult res = estimate(sc, config.estimator);
        const Channels sel = res.selected();
        rec.L_est = res.L_est;
        for (std::size_t k = 0; k < sc.truth.size(); ++k)
        {
            const MatchResult m = match_paths(sc.truth[k], sel[k], config.match_threshold);
            rec.f1.push_back(f1_score(m));
            rec.mae.push_back(mae(m));
            rec.matches.push_back(m.pairs.size());
        }
        rec.path_updates = res.telemetry.path_updates;
        rec.safeguard_fallbacks = res.telemetry.safeguard_fallbacks;
        rec.monotonicity_violations = res.telemetry.monotonicity_violations;
        rec.worst_violation = res.telemetry.worst_violation;
        rec.ok = true;
    }
    catch (const std::exception &e)
    {
        rec.ok = false;
        rec.error = e.what();
        rec.f1.clear();
        rec.mae.clear();
        rec.matches.clear();
    }
    return rec;
}

namespace
{

std::pair<double, double> mean_stderr(const std::vector<double> &v)
{
    if (v.empty())
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    double mean = 0.0;
    for (double x : v)
        mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2)
        return {mean, 0.0};
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    const double n = static_cast<double>(v.size());
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

} // namespace

std::vector<PointStats> aggregate(const SweepConfig &config, const std::vector<TrialRecord> &trials)
{
    std::vector<PointStats> out;
    for (std::size_t p = 0; p < config.powers_dbw.size(); ++p)
        for (std::size_t k = 0; k < config.scenario.K; ++k)
        {
            PointStats s;
            s.power_dbw = config.powers_dbw[p];
            s.user = k;
            std::vector<double> f1;
            std::array<std::vector<double>, 5> err;
            for (const TrialRecord &t : trials)
            {
                if (t.point != p || !t.ok)
                    continue;
                f1.push_back(t.f1.at(k));
                if (t.mae.at(k))
                {
                    const auto v = t.mae[k]->values();
                    for (std::size_t i = 0; i < 5; ++i)
                        err[i].push_back(v[i]);
                }
            }
            s.trials = f1.size();
            std::tie(s.f1_mean, s.f1_stderr) = mean_stderr(f1);
            s.mae_trials = err[0].size();
            for (std::size_t i = 0; i < 5; ++i)
                std::tie(s.mae_mean[i], s.mae_stderr[i]) = mean_stderr(err[i]);
            out.push_back(s);
        }
    return out;
}

const PointStats &SweepResult::at(std::size_t point, std::size_t user) const
{
    return stats.at(point * config.scenario.K + user);
}

SweepResult run_sweep(const SweepConfig &config, const ProgressFn &progress)
{
    config.validate();
    const std::size_t P = config.powers_dbw.size(), T = config.trials, total = P * T;
    SweepResult res;
    res.config = config;
    res.trials.resize(total);

    std::size_t workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, total);
    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex progress_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < total; i = next++)
        {
            res.trials[i] = run_trial(config, i / T, i % T);
            if (progress)
            {
                std::lock_guard<std::mutex> lock(progress_mutex);
                progress(++done, total);
            }
        }
    };
    if (workers <= 1)
        work();
    else
    {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto &t : pool)
            t.join();
    }

    for (const TrialRecord &t : res.trials)
    {
        if (!t.ok)
            ++res.failed_trials;
        res.monotonicity_violations += t.monotonicity_violations;
    }
    res.stats = aggregate(config, res.trials);
    return res;
}

namespace
{

std::string num(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_csv(const SweepResult &result, std::ostream &out)
{
    out << "power_dbw,user,trials,f1_mean,f1_stderr,mae_trials";
    const char *units[] = {"rad", "rad", "rad", "rad", "rel"};
    for (std::size_t i = 0; i < 5; ++i)
        out << ",mae_" << error_names[i] << '_' << units[i] << ",mae_" << error_names[i] << "_stderr";
    out << "\r\n";
    for (const PointStats &s : result.stats)
    {
        out << num(s.power_dbw) << ',' << s.user + 1 << ',' << s.trials << ',' << num(s.f1_mean) << ','
            << num(s.f1_stderr) << ',' << s.mae_trials;
        for (std::size_t i = 0; i < 5; ++i)
            out << ',' << num(s.mae_mean[i]) << ',' << num(s.mae_stderr[i]);
        out << "\r\n";
    }
}

std::string csv_text(const SweepResult &result)
{
    std::ostringstream os;
    write_csv(result, os);
    return os.str();
}

void report(const SweepResult &result, const std::string &dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(dir) / "plot", ec);
    if (ec)
        throw Error(ErrorCode::io, "cannot create output directory " + dir + ": " + ec.message());

    auto open = [](const fs::path &p) {
        std::ofstream f(p, std::ios::binary);
        if (!f)
            throw Error(ErrorCode::io, "cannot write " + p.string());
        return f;
    };
    {
        auto f = open(fs::path(dir) / "sweep.csv");
        write_csv(result, f);
    }
    for (std::size_t k = 0; k < result.config.scenario.K; ++k)
    {
        const std::string suffix = "_user" + std::to_string(k + 1) + ".dat";
        {
            auto f = open(fs::path(dir) / "plot" / ("f1" + suffix));
            f << "# power_dbw f1 stderr\n";
            for (const PointStats &s : result.stats)
                if (s.user == k)
                    f << num(s.power_dbw) << ' ' << num(s.f1_mean) << ' ' << num(s.f1_stderr) << '\n';
        }
        for (std::size_t i = 0; i < 5; ++i)
        {
            auto f = open(fs::path(dir) / "plot" / ("mae_" + std::string(error_names[i]) + suffix));
            f << "# power_dbw mae_" << error_names[i] << " stderr\n";
            for (const PointStats &s : result.stats)
                if (s.user == k)
                    f << num(s.power_dbw) << ' ' << num(s.mae_mean[i]) << ' ' << num(s.mae_stderr[i]) << '\n';
        }
    }
    {
        auto f = open(fs::path(dir) / "manifest.json");
        f << manifest_json(result.config);
    }
    save_sweep(result, (fs::path(dir) / "sweep_result.json").string());
}

} // namespace pce
