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
#include "pce/pce.h"

#include "pce/io.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <string>

struct pce_config
{
    pce::SweepConfig value;
};

struct pce_scenario
{
    pce::Scenario value;
};

struct pce_result
{
    pce::EstimateResult value;
};

struct pce_sweep
{
    pce::SweepResult value;
};

namespace
{

thread_local std::string last_error;

pce_status fail(pce_status s, const std::string &msg)
{
    last_error = msg;
    return s;
}

pce_status status_of(pce::ErrorCode c)
{
    switch (c)
    {
    case pce::ErrorCode::invalid_argument:
        return PCE_ERR_INVALID_ARGUMENT;
    case pce::ErrorCode::dimension_mismatch:
        return PCE_ERR_DIMENSION;
    case pce::ErrorCode::degenerate:
        return PCE_ERR_DEGENERATE;
    case pce::ErrorCode::not_isotropic:
        return PCE_ERR_NOT_ISOTROPIC;
    case pce::ErrorCode::io:
        return PCE_ERR_IO;
    case pce::ErrorCode::format:
        return PCE_ERR_FORMAT;
    }
    return PCE_ERR_INTERNAL;
}

template <class F>
pce_status guard(F &&f)
{
    try
    {
        f();
        last_error.clear();
        return PCE_OK;
    }
    catch (const pce::Error &e)
    {
        return fail(status_of(e.code()), e.what());
    }
    catch (const std::bad_alloc &)
    {
        return fail(PCE_ERR_INTERNAL, "out of memory");
    }
    catch (const std::exception &e)
    {
        return fail(PCE_ERR_INTERNAL, e.what());
    }
    catch (...)
    {
        return fail(PCE_ERR_INTERNAL, "unknown error");
    }
}

void require(const void *p, const char *what)
{
    if (!p)
        throw pce::Error(pce::ErrorCode::invalid_argument, std::string(what) + " is null");
}

pce_path to_c(const pce::PathParams &p) { return {p.b.real(), p.b.imag(), p.omega1, p.omega2, p.phi, p.theta}; }

void copy_paths(const std::vector<pce::PathParams> &src, pce_path *paths, size_t capacity, size_t *count)
{
    require(count, "count");
    if (capacity > 0)
        require(paths, "paths");
    *count = src.size();
    for (size_t i = 0; i < src.size() && i < capacity; ++i)
        paths[i] = to_c(src[i]);
}

void copy_text(const std::string &s, char *buf, size_t len, size_t *needed)
{
    if (needed)
        *needed = s.size() + 1;
    if (!buf || len == 0)
        return;
    if (len < s.size() + 1)
        throw pce::Error(pce::ErrorCode::invalid_argument, "buffer too small");
    std::memcpy(buf, s.c_str(), s.size() + 1);
}

} // namespace

extern "C" {

const char *pce_version(void) { return pce::version(); }

const char *pce_last_error(void) { return last_error.c_str(); }

const char *pce_status_string(pce_status s)
{
    switch (s)
    {
    case PCE_OK:
        return "ok";
    case PCE_ERR_INVALID_ARGUMENT:
        return "invalid argument";
    case PCE_ERR_DIMENSION:
        return "dimension mismatch";
    case PCE_ERR_DEGENERATE:
        return "degenerate input";
    case PCE_ERR_NOT_ISOTROPIC:
        return "pilots not isotropic";
    case PCE_ERR_IO:
        return "i/o error";
    case PCE_ERR_FORMAT:
        return "malformed file";
    case PCE_ERR_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

pce_status pce_config_create(pce_config **out)
{
    return guard([&] {
        require(out, "out");
        *out = new pce_config{pce::default_sweep_config()};
    });
}

void pce_config_destroy(pce_config *config) { delete config; }

pce_status pce_config_set(pce_config *config, const char *key, const char *value)
{
    return guard([&] {
        require(config, "config");
        require(key, "key");
        require(value, "value");
        pce::set_config_value(config->value, key, value);
    });
}

pce_status pce_config_load(const char *path, pce_config **out)
{
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new pce_config{pce::load_config(path)};
    });
}

pce_status pce_config_save(const pce_config *config, const char *path)
{
    return guard([&] {
        require(config, "config");
        require(path, "path");
        pce::save_config(config->value, path);
    });
}

pce_status pce_config_json(const pce_config *config, char *buf, size_t len, size_t *needed)
{
    return guard([&] {
        require(config, "config");
        copy_text(pce::config_json(config->value), buf, len, needed);
    });
}

pce_status pce_scenario_generate(const pce_config *config, uint64_t seed, pce_scenario **out)
{
    return guard([&] {
        require(config, "config");
        require(out, "out");
        pce::ScenarioConfig c = config->value.scenario;
        c.seed = seed;
        *out = new pce_scenario{pce::sample_scenario(c)};
    });
}

pce_status pce_scenario_load(const char *path, pce_scenario **out)
{
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new pce_scenario{pce::load_scenario(path)};
    });
}

pce_status pce_scenario_save(const pce_scenario *scenario, const char *path)
{
    return guard([&] {
        require(scenario, "scenario");
        require(path, "path");
        pce::save_scenario(scenario->value, path);
    });
}

void pce_scenario_destroy(pce_scenario *scenario) { delete scenario; }

pce_status pce_scenario_dims(const pce_scenario *scenario, pce_dims *out)
{
    return guard([&] {
        require(scenario, "scenario");
        require(out, "out");
        const pce::Dims &d = scenario->value.config.dims;
        *out = {scenario->value.config.K, d.Nc, d.Ns, d.Nr, d.Nt};
    });
}

pce_status pce_scenario_truth(const pce_scenario *scenario, size_t user, pce_path *paths, size_t capacity,
                              size_t *count)
{
    return guard([&] {
        require(scenario, "scenario");
        if (user >= scenario->value.truth.size())
            throw pce::Error(pce::ErrorCode::invalid_argument, "user index out of range");
        copy_paths(scenario->value.truth[user], paths, capacity, count);
    });
}

pce_status pce_scenario_received(const pce_scenario *scenario, double *data, size_t len)
{
    return guard([&] {
        require(scenario, "scenario");
        require(data, "data");
        const pce::Tensor3 &y = scenario->value.received;
        if (len < 2 * y.size())
            throw pce::Error(pce::ErrorCode::invalid_argument, "buffer too small");
        std::memcpy(data, y.data(), y.size() * sizeof(pce::cd));
    });
}

pce_status pce_estimate(const pce_scenario *scenario, const pce_config *config, pce_result **out)
{
    return guard([&] {
        require(scenario, "scenario");
        require(config, "config");
        require(out, "out");
        *out = new pce_result{pce::estimate(scenario->value, config->value.estimator)};
    });
}

pce_status pce_result_load(const char *path, pce_result **out)
{
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new pce_result{pce::load_result(path)};
    });
}

pce_status pce_result_save(const pce_result *result, const char *path)
{
    return guard([&] {
        require(result, "result");
        require(path, "path");
        pce::save_result(result->value, path);
    });
}

void pce_result_destroy(pce_result *result) { delete result; }

pce_status pce_result_users(const pce_result *result, size_t *users)
{
    return guard([&] {
        require(result, "result");
        require(users, "users");
        *users = result->value.paths.size();
    });
}

pce_status pce_result_model_order(const pce_result *result, size_t user, size_t *L)
{
    return guard([&] {
        require(result, "result");
        require(L, "L");
        if (user >= result->value.L_est.size())
            throw pce::Error(pce::ErrorCode::invalid_argument, "user index out of range");
        *L = result->value.L_est[user];
    });
}

pce_status pce_result_paths(const pce_result *result, size_t user, int selected_only, pce_path *paths,
                            size_t capacity, size_t *count)
{
    return guard([&] {
        require(result, "result");
        if (user >= result->value.paths.size())
            throw pce::Error(pce::ErrorCode::invalid_argument, "user index out of range");
        if (selected_only)
            copy_paths(result->value.selected()[user], paths, capacity, count);
        else
            copy_paths(result->value.paths[user], paths, capacity, count);
    });
}

pce_status pce_result_objective(const pce_result *result, double *objective)
{
    return guard([&] {
        require(result, "result");
        require(objective, "objective");
        *objective = result->value.objective;
    });
}

pce_status pce_result_telemetry(const pce_result *result, pce_telemetry *out)
{
    return guard([&] {
        require(result, "result");
        require(out, "out");
        const pce::Telemetry &t = result->value.telemetry;
        *out = {t.user_visits,    t.paths_added,
                t.path_updates,   t.safeguard_fallbacks,
                t.failed_updates, t.monotonicity_violations,
                t.reached_optimality ? 1 : 0};
    });
}

pce_status pce_match(const pce_scenario *scenario, const pce_result *result, size_t user, double threshold,
                     pce_metrics *out)
{
    return guard([&] {
        require(scenario, "scenario");
        require(result, "result");
        require(out, "out");
        if (user >= scenario->value.truth.size() || user >= result->value.paths.size())
            throw pce::Error(pce::ErrorCode::invalid_argument, "user index out of range");
        const pce::MatchResult m =
            pce::match_paths(scenario->value.truth[user], result->value.selected()[user], threshold);
        const auto e = pce::mae(m);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        *out = {pce::f1_score(m),
                m.pairs.size(),
                m.truth_count,
                m.estimate_count,
                e ? 1 : 0,
                e ? e->omega1 : nan,
                e ? e->omega2 : nan,
                e ? e->phi : nan,
                e ? e->theta : nan,
                e ? e->gain : nan};
    });
}

pce_status pce_sweep_run(const pce_config *config, pce_progress_fn progress, void *user_data, pce_sweep **out)
{
    return guard([&] {
        require(config, "config");
        require(out, "out");
        pce::ProgressFn fn;
        if (progress)
            fn = [progress, user_data](std::size_t done, std::size_t total) { progress(done, total, user_data); };
        *out = new pce_sweep{pce::run_sweep(config->value, fn)};
    });
}

pce_status pce_sweep_load(const char *path, pce_sweep **out)
{
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new pce_sweep{pce::load_sweep(path)};
    });
}

pce_status pce_sweep_save(const pce_sweep *sweep, const char *path)
{
    return guard([&] {
        require(sweep, "sweep");
        require(path, "path");
        pce::save_sweep(sweep->value, path);
    });
}

void pce_sweep_destroy(pce_sweep *sweep) { delete sweep; }

pce_status pce_sweep_report(const pce_sweep *sweep, const char *dir)
{
    return guard([&] {
        require(sweep, "sweep");
        require(dir, "dir");
        pce::report(sweep->value, dir);
    });
}

pce_status pce_sweep_csv(const pce_sweep *sweep, char *buf, size_t len, size_t *needed)
{
    return guard([&] {
        require(sweep, "sweep");
        copy_text(pce::csv_text(sweep->value), buf, len, needed);
    });
}

pce_status pce_sweep_summary_get(const pce_sweep *sweep, pce_sweep_summary *out)
{
    return guard([&] {
        require(sweep, "sweep");
        require(out, "out");
        const pce::SweepResult &r = sweep->value;
        *out = {r.config.powers_dbw.size(), r.config.scenario.K, r.config.trials, r.failed_trials,
                r.monotonicity_violations};
    });
}

pce_status pce_sweep_point(const pce_sweep *sweep, size_t point, size_t user, pce_point_stats *out)
{
    return guard([&] {
        require(sweep, "sweep");
        require(out, "out");
        const pce::SweepResult &r = sweep->value;
        if (point >= r.config.powers_dbw.size() || user >= r.config.scenario.K)
            throw pce::Error(pce::ErrorCode::invalid_argument, "sweep point or user out of range");
        const pce::PointStats &s = r.at(point, user);
        out->power_dbw = s.power_dbw;
        out->trials = s.trials;
        out->mae_trials = s.mae_trials;
        out->f1_mean = s.f1_mean;
        out->f1_stderr = s.f1_stderr;
        for (int i = 0; i < 5; ++i)
        {
            out->mae_mean[i] = s.mae_mean[static_cast<std::size_t>(i)];
            out->mae_stderr[i] = s.mae_stderr[static_cast<std::size_t>(i)];
        }
    });
}

} // extern "C"
