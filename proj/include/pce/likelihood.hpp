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

#ifndef PCE_LIKELIHOOD_HPP
#define PCE_LIKELIHOOD_HPP

#include "pce/model.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace pce
{

// Immutable estimation input: received tensor, per-user pilots and the noise level.
class Observation
{
  public:
    Observation(ReceivedTensor y, std::vector<PilotTensor> pilots, double N0);

    static std::shared_ptr<const Observation> from_scenario(const Scenario &sc);

    const Dims &dims() const { return dims_; }
    const ReceivedTensor &y() const { return y_; }
    const PilotTensor &pilots(std::size_t user) const { return pilots_.at(user); }
    std::size_t users() const { return pilots_.size(); }
    double N0() const { return N0_; }

    // check_isotropy of each user's pilots, evaluated once at construction.
    double isotropy_deviation(std::size_t user) const { return isotropy_.at(user); }
    bool isotropic(std::size_t user) const;

  private:
    Dims dims_;
    ReceivedTensor y_;
    std::vector<PilotTensor> pilots_;
    double N0_;
    std::vector<double> isotropy_;
};

inline constexpr double isotropy_tolerance = 1e-10;

// Single-path signal with unit gain and its energy sum |alpha|^2.
struct Regressor
{
    Tensor3 alpha;
    double energy = 0.0;
};

Regressor build_regressor(const Harmonics &h, const PilotTensor &pilots, const Dims &dims);

// <alpha, r> (conjugating alpha) and the regressor energy, without materialising alpha.
struct Projection
{
    cd inner;
    double energy;
};

Projection project(const Tensor3 &r, const Harmonics &h, const PilotTensor &pilots);

using PathId = std::size_t;

struct PathRecord
{
    std::size_t user = 0;
    cd gain;
    Harmonics geometry;
    bool attached = false; // contribution currently subtracted from the residual
    Tensor3 contribution;  // gain * alpha
};

// The optimizer's working memory: residual y - (attached paths), the 1/N0-scaled objective,
// and one cached contribution per registered path.
class ResidualState
{
  public:
    explicit ResidualState(std::shared_ptr<const Observation> obs);

    const Observation &observation() const { return *obs_; }
    std::shared_ptr<const Observation> observation_ptr() const { return obs_; }
    const Tensor3 &residual() const { return residual_; }

    // (1/N0) sum |residual|^2
    double objective() const { return objective_; }
    double residual_energy() const { return energy_; }

    PathId add_path(std::size_t user, cd gain, const Harmonics &h);
    // Replaces the path's parameters; the path ends up attached.
    void set_path(PathId id, cd gain, const Harmonics &h);
    void set_path(PathId id, const PathParams &p) { set_path(id, p.b, to_harmonics(p)); }
    // Adds the path's contribution back so that the residual excludes it.
    void detach(PathId id);
    void attach(PathId id);
    // Moves a detached path without touching the residual.
    void set_geometry(PathId id, const Harmonics &h);
    void remove_path(PathId id);
    void clear_user(std::size_t user);

    bool has_path(PathId id) const { return id < paths_.size() && paths_[id].has_value(); }
    const PathRecord &path(PathId id) const;
    std::vector<PathId> paths_of(std::size_t user) const;
    std::vector<PathId> path_ids() const;

    // Objective with the listed paths' contributions added back (masked out of the model).
    double objective_without(const std::vector<PathId> &masked) const;

    // Rebuild the residual from y and all attached contributions.
    void recompute();
    // Objective of a from-scratch resynthesis, leaving the state untouched.
    double recomputed_objective() const;

    static constexpr std::size_t recompute_interval = 50;

  private:
    PathRecord &record(PathId id);
    void refresh_objective();
    void count_update();

    std::shared_ptr<const Observation> obs_;
    Tensor3 residual_;
    double energy_ = 0.0;
    double objective_ = 0.0;
    std::vector<std::optional<PathRecord>> paths_;
    std::size_t updates_since_recompute_ = 0;
};

// Gain minimising the objective for a detached path at its current geometry.
cd solve_gain(const ResidualState &state, PathId id);

// Objective with the detached path placed at `candidate` and its gain at the closed-form optimum.
double concentrated_objective(const ResidualState &state, PathId id, const Harmonics &candidate);

} // namespace pce

#endif
