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
#ifndef PCE_HARNESS_HPP
#define PCE_HARNESS_HPP

#include "pce/optimizer.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pce
{

inline constexpr double default_match_threshold = 0.35;

// Absolute errors of one matched pair: omega1, omega2, phi, theta in rad, gain relative.
struct PathError
{
    double omega1 = 0.0, omega2 = 0.0, phi = 0.0, theta = 0.0, gain = 0.0;

    std::array<double, 5> values() const { return {omega1, omega2, phi, theta, gain}; }
};

inline constexpr std::array<const char *, 5> error_names = {"omega1", "omega2", "phi", "theta", "gain"};

struct MatchResult
{
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (truth index, estimate index), by truth index
    std::vector<std::size_t> unmatched_truth;
    std::vector<std::size_t> unmatched_estimates;
    std::vector<PathError> errors; // parallel to pairs
    std::size_t truth_count = 0;
    std::size_t estimate_count = 0;
};

// |wrap d omega1| + |wrap d omega2| + |wrap d(pi sin phi)| + |wrap d(pi sin theta)|
double match_cost(const PathParams &truth, const PathParams &estimate);
PathError path_error(const PathParams &truth, const PathParams &estimate);

// Maximum number of pairs with cost <= threshold, and among those the smallest total cost.
MatchResult match_paths(std::span<const PathParams> truth, std::span<const PathParams> estimates,
                        double threshold = default_match_threshold);

double f1_score(const MatchResult &m);
// Mean error over matched pairs; empty when nothing matched.
std::optional<PathError> mae(const MatchResult &m);

struct SweepConfig
{
    ScenarioConfig scenario;
    EstimatorConfig estimator;
    std::vector<double> powers_dbw; // transmit power of swept_user at each point
    std::size_t swept_user = 0;
    std::size_t trials = 32;
    std::uint64_t master_seed = 1;
    double match_threshold = default_match_threshold;
    std::size_t threads = 0; // 0: hardware concurrency

    void validate() const;
    static std::vector<double> default_powers(); // -60 to -20 dBW in 2 dB steps
    // Seed of the scenario for one trial; shared by every power point.
    std::uint64_t trial_seed(std::size_t trial) const;
    ScenarioConfig point_scenario(std::size_t point, std::size_t trial) const;
};

SweepConfig default_sweep_config();

struct TrialRecord
{
    std::size_t point = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::vector<std::size_t> L_est;
    std::vector<double> f1;                      // per user
    std::vector<std::optional<PathError>> mae;   // per user
    std::vector<std::size_t> matches;            // per user
    std::size_t path_updates = 0;
    std::size_t safeguard_fallbacks = 0;
    std::size_t monotonicity_violations = 0;
    double worst_violation = 0.0;
};

struct PointStats
{
    double power_dbw = 0.0;
    std::size_t user = 0;
    std::size_t trials = 0; // trials that completed
    double f1_mean = 0.0;
    double f1_stderr = 0.0;
    std::size_t mae_trials = 0; // trials with at least one match
    std::array<double, 5> mae_mean{};
    std::array<double, 5> mae_stderr{};
};

struct SweepResult
{
    SweepConfig config;
    std::vector<TrialRecord> trials; // ordered by (point, trial)
    std::vector<PointStats> stats;   // ordered by (point, user)
    std::size_t failed_trials = 0;
    std::size_t monotonicity_violations = 0;

    const PointStats &at(std::size_t point, std::size_t user) const;
};

TrialRecord run_trial(const SweepConfig &config, std::size_t point, std::size_t trial);
std::vector<PointStats> aggregate(const SweepConfig &config, const std::vector<TrialRecord> &trials);

// Called after every finished trial with (done, total); may be invoked from worker threads, one at a time.
using ProgressFn = std::function<void(std::size_t, std::size_t)>;
SweepResult run_sweep(const SweepConfig &config, const ProgressFn &progress = {});

void write_csv(const SweepResult &result, std::ostream &out);
std::string csv_text(const SweepResult &result);
// Writes sweep.csv, plot/<metric>_user<k>.dat, manifest.json and sweep_result.json into dir.
void report(const SweepResult &result, const std::string &dir);

} // namespace pce

#endif
