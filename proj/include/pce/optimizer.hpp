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
#ifndef PCE_OPTIMIZER_HPP
#define PCE_OPTIMIZER_HPP

#include "pce/rootfind.hpp"

#include <memory>
#include <vector>

namespace pce
{

struct EstimatorConfig
{
    double rho = 1.05;      // over-relaxation factor
    double eta0 = 0.1;      // initial momentum coefficient of a path
    double eta_decay = 0.5; // applied after every update of the path
    std::size_t it_max = 30;
    std::size_t m_aic_max = 2; // AIC failures tolerated per user visit
    double gamma_aic = 28.7;   // penalty per path; MDL 3 ln(Nc Ns Nr) at 30 x 15 x 32
    std::size_t L_max = 6;
    std::size_t L_window = 0;               // 0: every path of the user takes part in the inner loop
    std::vector<std::size_t> user_schedule; // 0-based; empty: every user in order, three times
    double var_tol = 1e-8;
    double obj_tol_factor = 1e-10;
    double radial_tol = default_radial_tol;
    double optimality_sigmas = 3.0; // stop once f <= N + sigmas sqrt(N)
    bool stop_at_optimality = true;

    void validate() const;
    std::vector<std::size_t> schedule(std::size_t users) const;
};

struct PathSlot
{
    PathId id = 0;
    Harmonics previous; // coordinates before the last update, for momentum
    bool has_previous = false;
    double eta = 0.0;
    bool active = true;
    std::size_t age = 0; // insertion order within the user visit
};

struct UpdateReport
{
    double objective_before = 0.0;
    double objective_after = 0.0;
    double improvement = 0.0;
    double max_relative_change = 0.0; // phases as |wrapped delta| / pi, gain as |delta b| / |b|
    std::size_t fallbacks = 0;        // coordinates where the plain exact step replaced the accelerated one
    bool failed = false;
};

struct Telemetry
{
    std::size_t user_visits = 0;
    std::size_t paths_added = 0;
    std::size_t inner_iterations = 0;
    std::size_t path_updates = 0;
    std::size_t safeguard_fallbacks = 0;
    std::size_t failed_updates = 0;
    std::size_t monotonicity_violations = 0; // raw increases beyond rounding, before being rolled back
    double worst_violation = 0.0;
    bool reached_optimality = false;
    std::vector<double> objective_trace; // after every user visit
};

struct EstimateResult
{
    Channels paths; // every stored path per user, descending |b|
    std::vector<std::size_t> L_est;
    double objective = 0.0;          // with every stored path
    double selected_objective = 0.0; // with only the first L_est paths of each user
    Telemetry telemetry;

    Channels selected() const;
};

// xi_opt + eta * wrap(xi_m - xi_prev), wrapped into (-pi, pi].
double momentum_candidate(double xi_opt, double xi_m, double xi_prev, double eta);
// Wrap((1 - rho) xi_m + rho candidate), with the step measured along the shorter arc.
double relaxed_update(double xi_m, double candidate, double rho);

// Peak of the matched filter |<alpha(h), r>|^2 / E(h) over a zero-padded (2Nc, 2Ns, 2Nr) FFT grid and
// 2Nt transmit phases.
Harmonics beamspace_peak(const Tensor3 &residual, const PilotTensor &pilots);

class Estimator
{
  public:
    Estimator(std::shared_ptr<const Observation> obs, EstimatorConfig config);

    const EstimatorConfig &config() const { return config_; }
    const ResidualState &state() const { return state_; }
    ResidualState &state() { return state_; }
    const Telemetry &telemetry() const { return telemetry_; }
    std::vector<PathSlot> &slots(std::size_t user) { return slots_.at(user); }

    // (1/N0) sum |y|^2 - N, floored at 1; scales the objective-change stopping rule.
    double gamma_obj() const { return gamma_obj_; }
    double optimality_threshold() const;

    // New path at the beamspace peak of the residual, with its least-squares gain.
    PathSlot &add_path(std::size_t user);
    // New path with the given parameters.
    PathSlot &add_path(std::size_t user, const PathParams &path);
    UpdateReport update_path(PathSlot &slot);
    // Objective with user k reduced to its L strongest paths, plus gamma_aic L.
    double aic_user(std::size_t user, std::size_t L) const;
    void estimate_user(std::size_t user);
    // Argmin over L_k in [1, stored_k] (0 for a user without paths) of the joint AIC.
    std::vector<std::size_t> select_model_order() const;
    EstimateResult run();

  private:
    PathSlot &add_slot(std::size_t user, cd gain, const Harmonics &h);
    std::vector<PathId> by_magnitude(std::size_t user) const;
    std::vector<PathId> masked_beyond(const std::vector<std::size_t> &L) const;
    void inner_loop(std::size_t user);

    EstimatorConfig config_;
    ResidualState state_;
    std::vector<std::vector<PathSlot>> slots_;
    Telemetry telemetry_;
    double gamma_obj_ = 1.0;
};

EstimateResult estimate(std::shared_ptr<const Observation> obs, const EstimatorConfig &config);
EstimateResult estimate(const Scenario &scenario, const EstimatorConfig &config);

} // namespace pce

#endif
