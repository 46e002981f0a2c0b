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

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace
{

struct Failure
{
    int code;
};

void check(pce_status s, const char *what)
{
    if (s != PCE_OK)
    {
        std::fprintf(stderr, "pce: %s: %s (%s)\n", what, pce_last_error(), pce_status_string(s));
        throw Failure{1};
    }
}

// Owns a C handle and releases it with the matching destroy function.
template <class T, void (*Destroy)(T *)>
struct Handle
{
    T *p = nullptr;
    Handle() = default;
    Handle(const Handle &) = delete;
    Handle &operator=(const Handle &) = delete;
    ~Handle() { Destroy(p); }
    T **out() { return &p; }
    T *get() const { return p; }
};

using Config = Handle<pce_config, pce_config_destroy>;
using ScenarioH = Handle<pce_scenario, pce_scenario_destroy>;
using ResultH = Handle<pce_result, pce_result_destroy>;
using SweepH = Handle<pce_sweep, pce_sweep_destroy>;

struct Common
{
    std::string config_path;
    std::vector<std::string> settings;
};

void load_config(Config &cfg, const Common &c)
{
    if (c.config_path.empty())
        check(pce_config_create(cfg.out()), "default configuration");
    else
        check(pce_config_load(c.config_path.c_str(), cfg.out()), c.config_path.c_str());
    for (const std::string &kv : c.settings)
    {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
        {
            std::fprintf(stderr, "pce: --set expects key=value, got '%s'\n", kv.c_str());
            throw Failure{2};
        }
        check(pce_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()), kv.c_str());
    }
}

void ensure_dir(const std::string &dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
    {
        std::fprintf(stderr, "pce: cannot create %s: %s\n", dir.c_str(), ec.message().c_str());
        throw Failure{1};
    }
}

void print_paths(const pce_result *r, size_t users)
{
    for (size_t k = 0; k < users; ++k)
    {
        size_t L = 0, n = 0;
        check(pce_result_model_order(r, k, &L), "model order");
        check(pce_result_paths(r, k, 1, nullptr, 0, &n), "paths");
        std::vector<pce_path> p(n);
        check(pce_result_paths(r, k, 1, p.data(), n, &n), "paths");
        std::printf("user %zu: %zu path(s)\n", k + 1, L);
        std::printf("  %12s %10s %10s %10s %10s %10s\n", "|b|", "arg b", "omega1", "omega2", "phi", "theta");
        for (const pce_path &q : p)
            std::printf("  %12.5e %10.6f %10.6f %10.6f %10.6f %10.6f\n", std::hypot(q.gain_re, q.gain_im),
                        std::atan2(q.gain_im, q.gain_re), q.omega1, q.omega2, q.phi, q.theta);
    }
}

void progress(size_t done, size_t total, void *)
{
    std::fprintf(stderr, "\r%zu/%zu trials", done, total);
    if (done == total)
        std::fputc('\n', stderr);
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Multipath channel parameter estimation for multiuser uplink sensing"};
    app.require_subcommand(1);
    app.set_version_flag("--version", pce_version());

    Common common;
    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", common.config_path, "configuration or manifest file (JSON)")
            ->check(CLI::ExistingFile);
        sub->add_option("--set", common.settings, "override one configuration key, key=value")
            ->type_name("KEY=VALUE");
    };

    std::string out;
    std::string in;
    std::uint64_t seed = 1;
    std::size_t trials = 0, threads = 0;

    auto *gen = app.add_subcommand("generate", "sample a random scenario and write it to a file");
    add_common(gen);
    gen->add_option("--seed", seed, "scenario seed");
    gen->add_option("--out", out, "scenario file to write")->required();

    auto *est = app.add_subcommand("estimate", "estimate the channel paths of a scenario file");
    add_common(est);
    est->add_option("scenario", in, "scenario file")->required()->check(CLI::ExistingFile);
    est->add_option("--out", out, "result file to write (JSON)");

    auto *sweep = app.add_subcommand("sweep", "Monte Carlo power sweep; writes CSV, plot data and a manifest");
    add_common(sweep);
    auto *seed_opt = sweep->add_option("--seed", seed, "master seed");
    sweep->add_option("--trials", trials, "trials per power point");
    sweep->add_option("--threads", threads, "worker threads (0: all cores)");
    sweep->add_option("--out", out, "output directory")->required();

    auto *rep = app.add_subcommand("report", "re-render the outputs of a stored sweep");
    rep->add_option("sweep", in, "sweep_result.json of an earlier run")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (gen->parsed())
        {
            Config cfg;
            load_config(cfg, common);
            ScenarioH sc;
            check(pce_scenario_generate(cfg.get(), seed, sc.out()), "generate");
            check(pce_scenario_save(sc.get(), out.c_str()), out.c_str());
            pce_dims d;
            check(pce_scenario_dims(sc.get(), &d), "dims");
            std::printf("wrote %s (K=%zu, Nc=%zu, Ns=%zu, Nr=%zu, Nt=%zu, seed %llu)\n", out.c_str(), d.K, d.Nc,
                        d.Ns, d.Nr, d.Nt, static_cast<unsigned long long>(seed));
        }
        else if (est->parsed())
        {
            Config cfg;
            load_config(cfg, common);
            ScenarioH sc;
            check(pce_scenario_load(in.c_str(), sc.out()), in.c_str());
            ResultH res;
            check(pce_estimate(sc.get(), cfg.get(), res.out()), "estimate");
            size_t users = 0;
            double objective = 0.0;
            check(pce_result_users(res.get(), &users), "users");
            check(pce_result_objective(res.get(), &objective), "objective");
            print_paths(res.get(), users);
            std::printf("objective %.6g\n", objective);
            for (size_t k = 0; k < users; ++k)
            {
                pce_metrics m;
                check(pce_match(sc.get(), res.get(), k, 0.35, &m), "match");
                std::printf("user %zu vs truth: F1 %.3f (%zu of %zu matched)\n", k + 1, m.f1, m.matches,
                            m.truth_count);
            }
            if (!out.empty())
                check(pce_result_save(res.get(), out.c_str()), out.c_str());
        }
        else if (sweep->parsed())
        {
            Config cfg;
            load_config(cfg, common);
            if (seed_opt->count())
                check(pce_config_set(cfg.get(), "master_seed", std::to_string(seed).c_str()), "--seed");
            if (trials)
                check(pce_config_set(cfg.get(), "trials", std::to_string(trials).c_str()), "--trials");
            if (sweep->count("--threads"))
                check(pce_config_set(cfg.get(), "threads", std::to_string(threads).c_str()), "--threads");
            ensure_dir(out);
            SweepH sw;
            check(pce_sweep_run(cfg.get(), progress, nullptr, sw.out()), "sweep");
            check(pce_sweep_report(sw.get(), out.c_str()), out.c_str());
            pce_sweep_summary s;
            check(pce_sweep_summary_get(sw.get(), &s), "summary");
            std::printf("%zu points x %zu trials, %zu failed trial(s), %zu monotonicity violation(s); outputs in %s\n",
                        s.points, s.trials, s.failed_trials, s.monotonicity_violations, out.c_str());
        }
        else if (rep->parsed())
        {
            SweepH sw;
            check(pce_sweep_load(in.c_str(), sw.out()), in.c_str());
            ensure_dir(out);
            check(pce_sweep_report(sw.get(), out.c_str()), out.c_str());
            std::printf("outputs in %s\n", out.c_str());
        }
    }
    catch (const Failure &f)
    {
        return f.code;
    }
    return 0;
}
