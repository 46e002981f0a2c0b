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
#include "pce/io.hpp"

#include "json.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace pce
{

using nlohmann::json;

const char *version() { return "1.0.0"; }

namespace
{

std::string read_file(const std::string &path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorCode::io, "cannot open " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write_file(const std::string &path, const std::string &text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text) || !f.flush())
        throw Error(ErrorCode::io, "cannot write " + path);
}

json parse_json(const std::string &text, const char *what)
{
    try
    {
        return json::parse(text);
    }
    catch (const json::exception &e)
    {
        throw Error(ErrorCode::format, std::string("malformed ") + what + ": " + e.what());
    }
}

// NaN has no JSON spelling; it travels as null.
json number(double v) { return std::isnan(v) ? json(nullptr) : json(v); }
double number(const json &j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

std::vector<std::size_t> to_one_based(const std::vector<std::size_t> &v)
{
    std::vector<std::size_t> out;
    for (std::size_t k : v)
        out.push_back(k + 1);
    return out;
}

std::vector<std::size_t> from_one_based(const json &j, const char *key)
{
    std::vector<std::size_t> out;
    for (const auto &x : j)
    {
        const long k = x.get<long>();
        if (k < 1)
            throw Error(ErrorCode::invalid_argument, std::string(key) + " uses 1-based user numbers");
        out.push_back(static_cast<std::size_t>(k - 1));
    }
    return out;
}

json scenario_fields(const ScenarioConfig &c)
{
    return json{{"K", c.K},
                {"L", c.L},
                {"Nc", c.dims.Nc},
                {"Ns", c.dims.Ns},
                {"Nr", c.dims.Nr},
                {"Nt", c.dims.Nt},
                {"N0", c.N0},
                {"tx_powers", c.tx_powers},
                {"rice_noncentrality", c.rice_noncentrality},
                {"rice_scale", c.rice_scale},
                {"los_boost", c.los_boost},
                {"seed", c.seed},
                {"noiseless", c.noiseless}};
}

json config_object(const SweepConfig &c)
{
    json j = scenario_fields(c.scenario);
    const EstimatorConfig &e = c.estimator;
    j["rho"] = e.rho;
    j["eta0"] = e.eta0;
    j["eta_decay"] = e.eta_decay;
    j["it_max"] = e.it_max;
    j["m_aic_max"] = e.m_aic_max;
    j["gamma_aic"] = e.gamma_aic;
    j["L_max"] = e.L_max;
    j["L_window"] = e.L_window;
    j["user_schedule"] = to_one_based(e.user_schedule);
    j["var_tol"] = e.var_tol;
    j["obj_tol_factor"] = e.obj_tol_factor;
    j["radial_tol"] = e.radial_tol;
    j["optimality_sigmas"] = e.optimality_sigmas;
    j["stop_at_optimality"] = e.stop_at_optimality;
    j["powers_dbw"] = c.powers_dbw;
    j["swept_user"] = c.swept_user + 1;
    j["trials"] = c.trials;
    j["master_seed"] = c.master_seed;
    j["match_threshold"] = c.match_threshold;
    j["threads"] = c.threads;
    return j;
}

void resize_users(ScenarioConfig &s, std::size_t K)
{
    s.K = K;
    if (s.L.size() != K)
        s.L.resize(K, s.L.empty() ? 3 : s.L.back());
    if (s.tx_powers.size() != K)
        s.tx_powers.resize(K, s.tx_powers.empty() ? -40.0 : s.tx_powers.back());
}

void apply(SweepConfig &c, const std::string &key, const json &v)
{
    ScenarioConfig &s = c.scenario;
    EstimatorConfig &e = c.estimator;
    try
    {
        if (key == "K")
            resize_users(s, v.get<std::size_t>());
        else if (key == "L")
            s.L = v.get<std::vector<std::size_t>>();
        else if (key == "Nc")
            s.dims.Nc = v.get<std::size_t>();
        else if (key == "Ns")
            s.dims.Ns = v.get<std::size_t>();
        else if (key == "Nr")
            s.dims.Nr = v.get<std::size_t>();
        else if (key == "Nt")
            s.dims.Nt = v.get<std::size_t>();
        else if (key == "N0")
            s.N0 = v.get<double>();
        else if (key == "tx_powers")
            s.tx_powers = v.get<std::vector<double>>();
        else if (key == "rice_noncentrality")
            s.rice_noncentrality = v.get<double>();
        else if (key == "rice_scale")
            s.rice_scale = v.get<double>();
        else if (key == "los_boost")
            s.los_boost = v.get<double>();
        else if (key == "seed")
            s.seed = v.get<std::uint64_t>();
        else if (key == "noiseless")
            s.noiseless = v.get<bool>();
        else if (key == "rho")
            e.rho = v.get<double>();
        else if (key == "eta0")
            e.eta0 = v.get<double>();
        else if (key == "eta_decay")
            e.eta_decay = v.get<double>();
        else if (key == "it_max")
            e.it_max = v.get<std::size_t>();
        else if (key == "m_aic_max")
            e.m_aic_max = v.get<std::size_t>();
        else if (key == "gamma_aic")
            e.gamma_aic = v.get<double>();
        else if (key == "L_max")
            e.L_max = v.get<std::size_t>();
        else if (key == "L_window")
            e.L_window = v.get<std::size_t>();
        else if (key == "user_schedule")
            e.user_schedule = from_one_based(v, "user_schedule");
        else if (key == "var_tol")
            e.var_tol = v.get<double>();
        else if (key == "obj_tol_factor")
            e.obj_tol_factor = v.get<double>();
        else if (key == "radial_tol")
            e.radial_tol = v.get<double>();
        else if (key == "optimality_sigmas")
            e.optimality_sigmas = v.get<double>();
        else if (key == "stop_at_optimality")
            e.stop_at_optimality = v.get<bool>();
        else if (key == "powers_dbw")
            c.powers_dbw = v.get<std::vector<double>>();
        else if (key == "swept_user")
        {
            const long k = v.get<long>();
            if (k < 1)
                throw Error(ErrorCode::invalid_argument, "swept_user is a 1-based user number");
            c.swept_user = static_cast<std::size_t>(k - 1);
        }
        else if (key == "trials")
            c.trials = v.get<std::size_t>();
        else if (key == "master_seed")
            c.master_seed = v.get<std::uint64_t>();
        else if (key == "match_threshold")
            c.match_threshold = v.get<double>();
        else if (key == "threads")
            c.threads = v.get<std::size_t>();
        else if (key == "pce_version" || key == "trial_seed_rule")
            ; // manifest metadata
        else
            throw Error(ErrorCode::invalid_argument, "unknown configuration key '" + key + "'");
    }
    catch (const json::exception &ex)
    {
        throw Error(ErrorCode::invalid_argument, "bad value for '" + key + "': " + ex.what());
    }
}

ScenarioConfig scenario_from(const json &j)
{
    SweepConfig c;
    for (auto it = j.begin(); it != j.end(); ++it)
        apply(c, it.key(), it.value());
    return c.scenario;
}

json path_json(const PathParams &p)
{
    return json{{"gain_abs", std::abs(p.b)}, {"gain_arg", std::arg(p.b)}, {"gain_re", p.b.real()},
                {"gain_im", p.b.imag()},     {"omega1", p.omega1},         {"omega2", p.omega2},
                {"phi", p.phi},              {"theta", p.theta}};
}

PathParams path_from(const json &j)
{
    return {cd(j.at("gain_re").get<double>(), j.at("gain_im").get<double>()), j.at("omega1").get<double>(),
            j.at("omega2").get<double>(), j.at("phi").get<double>(), j.at("theta").get<double>()};
}

void check_format(const json &j, const char *format)
{
    if (!j.is_object() || j.value("format", std::string()) != format)
        throw Error(ErrorCode::format, std::string("not a ") + format + " document");
}

template <class F>
auto guarded(const char *what, F &&f)
{
    try
    {
        return f();
    }
    catch (const json::exception &e)
    {
        throw Error(ErrorCode::format, std::string("malformed ") + what + ": " + e.what());
    }
}

} // namespace

std::string config_json(const SweepConfig &config) { return config_object(config).dump(2) + "\n"; }

SweepConfig parse_config(const std::string &text, const SweepConfig &base)
{
    const json j = parse_json(text, "configuration");
    if (!j.is_object())
        throw Error(ErrorCode::format, "configuration must be a JSON object");
    SweepConfig c = base;
    // K first so that per-user lists given alongside it are not resized afterwards.
    if (j.contains("K"))
        apply(c, "K", j.at("K"));
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "K")
            apply(c, it.key(), it.value());
    return c;
}

void set_config_value(SweepConfig &config, const std::string &key, const std::string &value)
{
    json v;
    try
    {
        v = json::parse(value);
    }
    catch (const json::exception &)
    {
        v = value;
    }
    apply(config, key, v);
}

SweepConfig load_config(const std::string &path) { return parse_config(read_file(path)); }

void save_config(const SweepConfig &config, const std::string &path) { write_file(path, config_json(config)); }

std::string manifest_json(const SweepConfig &config)
{
    json j = config_object(config);
    j["pce_version"] = version();
    j["trial_seed_rule"] = "splitmix64(master_seed, trial), shared by all power points";
    return j.dump(2) + "\n";
}

namespace
{

constexpr char scenario_magic[8] = {'P', 'C', 'E', 'S', 'C', 'N', '1', '\0'};

void require_little_endian()
{
    if constexpr (std::endian::native != std::endian::little)
        throw Error(ErrorCode::format, "scenario files are only supported on little-endian hosts");
}

void write_tensor(std::ofstream &f, const Tensor3 &t)
{
    f.write(reinterpret_cast<const char *>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(cd)));
}

void read_tensor(std::ifstream &f, Tensor3 &t)
{
    if (!f.read(reinterpret_cast<char *>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(cd))))
        throw Error(ErrorCode::format, "scenario file is truncated");
}

} // namespace

void save_scenario(const Scenario &sc, const std::string &path)
{
    require_little_endian();
    json h;
    h["format"] = "pce-scenario";
    h["version"] = 1;
    h["config"] = scenario_fields(sc.config);
    h["noise_seed"] = sc.noise_seed;
    json truth = json::array();
    for (const auto &paths : sc.truth)
    {
        json u = json::array();
        for (const auto &p : paths)
            u.push_back(path_json(p));
        truth.push_back(u);
    }
    h["truth"] = truth;
    const std::string header = h.dump();

    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorCode::io, "cannot write " + path);
    f.write(scenario_magic, sizeof scenario_magic);
    const std::uint64_t n = header.size();
    f.write(reinterpret_cast<const char *>(&n), sizeof n);
    f.write(header.data(), static_cast<std::streamsize>(n));
    for (const auto &x : sc.pilots)
        write_tensor(f, x);
    write_tensor(f, sc.received);
    if (!f.flush())
        throw Error(ErrorCode::io, "cannot write " + path);
}

Scenario load_scenario(const std::string &path)
{
    require_little_endian();
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorCode::io, "cannot open " + path);
    char magic[8];
    std::uint64_t n = 0;
    if (!f.read(magic, sizeof magic) || std::memcmp(magic, scenario_magic, sizeof magic) != 0)
        throw Error(ErrorCode::format, path + " is not a scenario file");
    if (!f.read(reinterpret_cast<char *>(&n), sizeof n) || n > (std::uint64_t{1} << 30))
        throw Error(ErrorCode::format, "scenario header is corrupt");
    std::string header(n, '\0');
    if (!f.read(header.data(), static_cast<std::streamsize>(n)))
        throw Error(ErrorCode::format, "scenario file is truncated");
    const json h = parse_json(header, "scenario header");
    check_format(h, "pce-scenario");

    Scenario sc;
    guarded("scenario header", [&] {
        sc.config = scenario_from(h.at("config"));
        sc.noise_seed = h.at("noise_seed").get<std::uint64_t>();
        for (const auto &u : h.at("truth"))
        {
            sc.truth.emplace_back();
            for (const auto &p : u)
                sc.truth.back().push_back(path_from(p));
        }
        return 0;
    });
    sc.config.validate();
    if (sc.truth.size() != sc.config.K)
        throw Error(ErrorCode::format, "scenario truth does not list every user");
    const Dims &d = sc.config.dims;
    for (std::size_t k = 0; k < sc.config.K; ++k)
    {
        sc.pilots.emplace_back(d.Nc, d.Ns, d.Nt);
        read_tensor(f, sc.pilots.back());
    }
    sc.received = Tensor3(d.Nc, d.Ns, d.Nr);
    read_tensor(f, sc.received);
    if (f.peek() != std::char_traits<char>::eof())
        throw Error(ErrorCode::format, "trailing bytes after scenario payload");
    return sc;
}

std::string result_json(const EstimateResult &r)
{
    json j;
    j["format"] = "pce-result";
    j["version"] = 1;
    json users = json::array();
    for (std::size_t k = 0; k < r.paths.size(); ++k)
    {
        json u;
        u["user"] = k + 1;
        u["L_est"] = k < r.L_est.size() ? r.L_est[k] : r.paths[k].size();
        json paths = json::array();
        for (const auto &p : r.paths[k])
            paths.push_back(path_json(p));
        u["paths"] = paths;
        users.push_back(u);
    }
    j["users"] = users;
    j["objective"] = r.objective;
    j["selected_objective"] = r.selected_objective;
    const Telemetry &t = r.telemetry;
    j["telemetry"] = json{{"user_visits", t.user_visits},
                          {"paths_added", t.paths_added},
                          {"inner_iterations", t.inner_iterations},
                          {"path_updates", t.path_updates},
                          {"safeguard_fallbacks", t.safeguard_fallbacks},
                          {"failed_updates", t.failed_updates},
                          {"monotonicity_violations", t.monotonicity_violations},
                          {"worst_violation", t.worst_violation},
                          {"reached_optimality", t.reached_optimality},
                          {"objective_trace", t.objective_trace}};
    return j.dump(2) + "\n";
}

EstimateResult parse_result(const std::string &text)
{
    const json j = parse_json(text, "result");
    check_format(j, "pce-result");
    return guarded("result", [&] {
        EstimateResult r;
        for (const auto &u : j.at("users"))
        {
            r.L_est.push_back(u.at("L_est").get<std::size_t>());
            r.paths.emplace_back();
            for (const auto &p : u.at("paths"))
                r.paths.back().push_back(path_from(p));
        }
        r.objective = j.at("objective").get<double>();
        r.selected_objective = j.at("selected_objective").get<double>();
        const json &t = j.at("telemetry");
        Telemetry &m = r.telemetry;
        m.user_visits = t.at("user_visits").get<std::size_t>();
        m.paths_added = t.at("paths_added").get<std::size_t>();
        m.inner_iterations = t.at("inner_iterations").get<std::size_t>();
        m.path_updates = t.at("path_updates").get<std::size_t>();
        m.safeguard_fallbacks = t.at("safeguard_fallbacks").get<std::size_t>();
        m.failed_updates = t.at("failed_updates").get<std::size_t>();
        m.monotonicity_violations = t.at("monotonicity_violations").get<std::size_t>();
        m.worst_violation = t.at("worst_violation").get<double>();
        m.reached_optimality = t.at("reached_optimality").get<bool>();
        m.objective_trace = t.at("objective_trace").get<std::vector<double>>();
        return r;
    });
}

void save_result(const EstimateResult &result, const std::string &path) { write_file(path, result_json(result)); }

EstimateResult load_result(const std::string &path) { return parse_result(read_file(path)); }

std::string sweep_json(const SweepResult &r)
{
    json j;
    j["format"] = "pce-sweep";
    j["version"] = 1;
    j["pce_version"] = version();
    j["config"] = config_object(r.config);
    json trials = json::array();
    for (const TrialRecord &t : r.trials)
    {
        json o{{"point", t.point},
               {"trial", t.trial},
               {"seed", t.seed},
               {"ok", t.ok},
               {"error", t.error},
               {"L_est", t.L_est},
               {"f1", t.f1},
               {"matches", t.matches},
               {"path_updates", t.path_updates},
               {"safeguard_fallbacks", t.safeguard_fallbacks},
               {"monotonicity_violations", t.monotonicity_violations},
               {"worst_violation", t.worst_violation}};
        json m = json::array();
        for (const auto &e : t.mae)
            m.push_back(e ? json(e->values()) : json(nullptr));
        o["mae"] = m;
        trials.push_back(o);
    }
    j["trials"] = trials;
    json stats = json::array();
    for (const PointStats &s : r.stats)
    {
        json m = json::array(), se = json::array();
        for (std::size_t i = 0; i < 5; ++i)
        {
            m.push_back(number(s.mae_mean[i]));
            se.push_back(number(s.mae_stderr[i]));
        }
        stats.push_back(json{{"power_dbw", s.power_dbw},
                             {"user", s.user + 1},
                             {"trials", s.trials},
                             {"f1_mean", number(s.f1_mean)},
                             {"f1_stderr", number(s.f1_stderr)},
                             {"mae_trials", s.mae_trials},
                             {"mae_mean", m},
                             {"mae_stderr", se}});
    }
    j["stats"] = stats;
    j["failed_trials"] = r.failed_trials;
    j["monotonicity_violations"] = r.monotonicity_violations;
    return j.dump(1) + "\n";
}

SweepResult parse_sweep(const std::string &text)
{
    const json j = parse_json(text, "sweep result");
    check_format(j, "pce-sweep");
    SweepResult r;
    r.config = parse_config(j.at("config").dump());
    guarded("sweep result", [&] {
        for (const auto &o : j.at("trials"))
        {
            TrialRecord t;
            t.point = o.at("point").get<std::size_t>();
            t.trial = o.at("trial").get<std::size_t>();
            t.seed = o.at("seed").get<std::uint64_t>();
            t.ok = o.at("ok").get<bool>();
            t.error = o.at("error").get<std::string>();
            t.L_est = o.at("L_est").get<std::vector<std::size_t>>();
            t.f1 = o.at("f1").get<std::vector<double>>();
            t.matches = o.at("matches").get<std::vector<std::size_t>>();
            t.path_updates = o.at("path_updates").get<std::size_t>();
            t.safeguard_fallbacks = o.at("safeguard_fallbacks").get<std::size_t>();
            t.monotonicity_violations = o.at("monotonicity_violations").get<std::size_t>();
            t.worst_violation = o.at("worst_violation").get<double>();
            for (const auto &m : o.at("mae"))
            {
                if (m.is_null())
                    t.mae.emplace_back();
                else
                {
                    const auto v = m.get<std::array<double, 5>>();
                    t.mae.emplace_back(PathError{v[0], v[1], v[2], v[3], v[4]});
                }
            }
            r.trials.push_back(std::move(t));
        }
        for (const auto &o : j.at("stats"))
        {
            PointStats s;
            s.power_dbw = o.at("power_dbw").get<double>();
            s.user = o.at("user").get<std::size_t>() - 1;
            s.trials = o.at("trials").get<std::size_t>();
            s.f1_mean = number(o.at("f1_mean"));
            s.f1_stderr = number(o.at("f1_stderr"));
            s.mae_trials = o.at("mae_trials").get<std::size_t>();
            for (std::size_t i = 0; i < 5; ++i)
            {
                s.mae_mean[i] = number(o.at("mae_mean").at(i));
                s.mae_stderr[i] = number(o.at("mae_stderr").at(i));
            }
            r.stats.push_back(s);
        }
        r.failed_trials = j.at("failed_trials").get<std::size_t>();
        r.monotonicity_violations = j.at("monotonicity_violations").get<std::size_t>();
        return 0;
    });
    return r;
}

void save_sweep(const SweepResult &result, const std::string &path) { write_file(path, sweep_json(result)); }

SweepResult load_sweep(const std::string &path) { return parse_sweep(read_file(path)); }

} // namespace pce
