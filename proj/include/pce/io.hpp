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
#ifndef PCE_IO_HPP
#define PCE_IO_HPP

// File formats. Configuration, manifests, results and sweeps are JSON; scenarios are a JSON header
// followed by raw little-endian complex doubles.

#include "pce/harness.hpp"

#include <string>

namespace pce
{

const char *version();

// Flat key/value JSON mirroring the ScenarioConfig, EstimatorConfig and SweepConfig field names.
// User indices (user_schedule, swept_user) are 1-based in the file.
std::string config_json(const SweepConfig &config);
// Applies the keys of a flat JSON object on top of base. Unknown keys are rejected.
SweepConfig parse_config(const std::string &text, const SweepConfig &base = default_sweep_config());
// One key with a JSON-encoded value; bare words are taken as strings.
void set_config_value(SweepConfig &config, const std::string &key, const std::string &value);
SweepConfig load_config(const std::string &path);
void save_config(const SweepConfig &config, const std::string &path);
// config_json plus the library version and the trial seed rule; loads back through load_config.
std::string manifest_json(const SweepConfig &config);

void save_scenario(const Scenario &scenario, const std::string &path);
Scenario load_scenario(const std::string &path);

std::string result_json(const EstimateResult &result);
EstimateResult parse_result(const std::string &text);
void save_result(const EstimateResult &result, const std::string &path);
EstimateResult load_result(const std::string &path);

std::string sweep_json(const SweepResult &result);
SweepResult parse_sweep(const std::string &text);
void save_sweep(const SweepResult &result, const std::string &path);
SweepResult load_sweep(const std::string &path);

} // namespace pce

#endif
