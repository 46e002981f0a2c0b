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
#include "pce/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pce
{

void EstimatorConfig::validate() const
{
    if (!(rho > 0.0 && rho < 2.0))
        throw Error(ErrorCode::invalid_argument, "rho must lie in (0, 2)");
    if (!(eta0 >= 0.0) || !(eta_decay >= 0.0))
        throw Error(ErrorCode::invalid_argument, "momentum coefficients must be non-negative");
    if (it_max < 1)
        throw Error(ErrorCode::invalid_argument, "it_max must be at least 1");
    if (L_max < 1)
        throw Error(ErrorCode::invalid_argument, "L_max must be at least 1");
    if (!(gamma_aic >= 0.0))
        throw Error(ErrorCode::invalid_argument, "gamma_aic must be non-negative");
    if (!(var_tol >= 0.0) || !(obj_tol_factor >= 0.0))
        throw Error(ErrorCode::invalid_argument, "stopping tolerances must be non-negative");
    if (!(radial_tol > 0.0))
        throw Error(ErrorCode::invalid_argument, "radial_tol must be positive");
}

std::vector<std::size_t> EstimatorConfig::schedule(std::size_t users) const
{
    if (!user_schedule.empty())
    {
        for (std::size_t k : user_schedule)
            if (k >= users)
                throw Error(ErrorCode::invalid_argument, "user schedule refers to user " + std::to_string(k + 1));
        return user_schedule;
    }
    std::vector<std::size_t> s;
    for (int cycle = 0; cycle < 3; ++cycle)
        for (std::size_t k = 0; k < users; ++k)
            s.push_back(k);
    return s;
}

Channels EstimateResult::selected() const
{
    Channels out(paths.size());
    for (std::size_t k = 0; k < paths.size(); ++k)
    {
        const std::size_t L = k < L_est.size() ? std::min(L_est[k], paths[k].size()) : paths[k].size();
        out[k].assign(paths[k].begin(), paths[k].begin() + static_cast<long>(L));
    }
    return out;
}

double momentum_candidate(double xi_opt, double xi_m, double xi_prev, double eta)
{
    return wrap_angle(xi_opt + eta * wrap_angle(xi_m - xi_prev));
}

double relaxed_update(double xi_m, double candidate, double rho)
{
    return wrap_angle(xi_m + rho * wrap_angle(candidate - xi_m));
}

Estimator::Estimator(std::shared_ptr<const Observation> obs, EstimatorConfig config)
    : config_(std::move(config)), state_(obs)
{
    config_.validate();
    for (std::size_t k = 0; k < obs->users(); ++k)
        if (!obs->isotropic(k))
            throw Error(ErrorCode::not_isotropic, "pilots of user " + std::to_string(k + 1) + " are not isotropic");
    slots_.resize(obs->users());
    const double N = static_cast<double>(obs->dims().samples());
    gamma_obj_ = std::max(state_.objective() - N, 1.0);
}

double Estimator::optimality_threshold() const
{
    const double N = static_cast<double>(state_.observation().dims().samples());
    return N + config_.optimality_sigmas * std::sqrt(N);
}

PathSlot &Estimator::add_path(std::size_t user)
{
    const Harmonics h = beamspace_peak(state_.residual(), state_.observation().pilots(user));
    const Projection p = project(state_.residual(), h, state_.observation().pilots(user));
    return add_slot(user, p.inner / p.energy, h);
}

PathSlot &Estimator::add_path(std::size_t user, const PathParams &path)
{
    return add_slot(user, path.b, to_harmonics(path));
}

PathSlot &Estimator::add_slot(std::size_t user, cd gain, const Harmonics &h)
{
    const PathId id = state_.add_path(user, gain, h);
    PathSlot slot;
    slot.id = id;
    slot.eta = config_.eta0;
    slot.age = slots_[user].size();
    slots_[user].push_back(slot);
    ++telemetry_.paths_added;
    return slots_[user].back();
}

UpdateReport Estimator::update_path(PathSlot &slot)
{
    UpdateReport rep;
    const PathRecord &rec = state_.path(slot.id);
    const cd old_gain = rec.gain;
    const Harmonics old = rec.geometry;
    rep.objective_before = state_.objective();
    ++telemetry_.path_updates;

    try
    {
        state_.detach(slot.id);
        Harmonics h = old;
        for (Coordinate c : all_coordinates)
        {
            const std::size_t i = static_cast<std::size_t>(c);
            const CoordinateSlice slice(state_, slot.id, c);
            const RootSet roots = unit_circle_roots(slice.derivative(), config_.radial_tol);
            const double x_m = h[i];
            const double x_opt = best_candidate(slice, roots, x_m);
            const double x_prev = slot.has_previous ? slot.previous[i] : x_m;
            double x_new = relaxed_update(x_m, momentum_candidate(x_opt, x_m, x_prev, slot.eta), config_.rho);
            // Accelerated step must not be worse than where the coordinate started.
            if (x_new != x_opt && slice.value(x_new) > slice.value(x_m))
            {
                x_new = x_opt;
                ++rep.fallbacks;
            }
            h[i] = x_new;
            state_.set_geometry(slot.id, h);
        }
        const cd gain = solve_gain(state_, slot.id);
        state_.set_path(slot.id, gain, h);

        rep.objective_after = state_.objective();
        const double tol = 1e-10 * std::abs(rep.objective_before) + 1e-9;
        if (rep.objective_after > rep.objective_before + tol)
        {
            ++telemetry_.monotonicity_violations;
            telemetry_.worst_violation =
                std::max(telemetry_.worst_violation, rep.objective_after - rep.objective_before);
        }
        if (rep.objective_after > rep.objective_before)
        {
            state_.set_path(slot.id, old_gain, old);
            rep.objective_after = state_.objective();
        }
        else
        {
            double change = std::abs(gain - old_gain) / std::max(std::abs(old_gain), 1e-300);
            for (std::size_t i = 0; i < 4; ++i)
                change = std::max(change, std::abs(wrap_angle(h[i] - old[i])) / pi);
            rep.max_relative_change = change;
            slot.previous = old;
            slot.has_previous = true;
        }
    }
    catch (const Error &)
    {
        state_.set_path(slot.id, old_gain, old);
        rep.failed = true;
        rep.objective_after = state_.objective();
        slot.active = false;
        ++telemetry_.failed_updates;
    }
    slot.eta *= config_.eta_decay;
    rep.improvement = rep.objective_before - rep.objective_after;
    telemetry_.safeguard_fallbacks += rep.fallbacks;
    return rep;
}

std::vector<PathId> Estimator::by_magnitude(std::size_t user) const
{
    std::vector<PathId> ids;
    for (const PathSlot &s : slots_[user])
        ids.push_back(s.id);
    std::stable_sort(ids.begin(), ids.end(), [&](PathId a, PathId b) {
        return std::abs(state_.path(a).gain) > std::abs(state_.path(b).gain);
    });
    return ids;
}

std::vector<PathId> Estimator::masked_beyond(const std::vector<std::size_t> &L) const
{
    std::vector<PathId> masked;
    for (std::size_t k = 0; k < L.size(); ++k)
    {
        const std::vector<PathId> ids = by_magnitude(k);
        for (std::size_t i = L[k]; i < ids.size(); ++i)
            masked.push_back(ids[i]);
    }
    return masked;
}

double Estimator::aic_user(std::size_t user, std::size_t L) const
{
    const std::vector<PathId> ids = by_magnitude(user);
    if (L > ids.size())
        throw Error(ErrorCode::invalid_argument, "AIC order exceeds the stored paths of the user");
    const std::vector<PathId> masked(ids.begin() + static_cast<long>(L), ids.end());
    return state_.objective_without(masked) + config_.gamma_aic * static_cast<double>(L);
}

void Estimator::inner_loop(std::size_t user)
{
    std::vector<PathSlot> &slots = slots_[user];
    const std::size_t first = config_.L_window > 0 && slots.size() > config_.L_window ? slots.size() - config_.L_window : 0;
    for (std::size_t i = 0; i < slots.size(); ++i)
        slots[i].active = i >= first;

    // Newest path first, then the rest from oldest to newest.
    std::vector<std::size_t> order{slots.size() - 1};
    for (std::size_t i = first; i + 1 < slots.size(); ++i)
        order.push_back(i);

    const double obj_tol = config_.obj_tol_factor * gamma_obj_;
    for (std::size_t it = 0; it < config_.it_max; ++it)
    {
        ++telemetry_.inner_iterations;
        bool any = false;
        for (std::size_t i : order)
        {
            PathSlot &slot = slots[i];
            if (!slot.active)
                continue;
            const UpdateReport rep = update_path(slot);
            if (rep.improvement < obj_tol || rep.max_relative_change < config_.var_tol)
                slot.active = false;
            any = any || slot.active;
        }
        if (!any)
            break;
    }
}

void Estimator::estimate_user(std::size_t user)
{
    if (user >= slots_.size())
        throw Error(ErrorCode::invalid_argument, "user index out of range");
    ++telemetry_.user_visits;
    state_.clear_user(user);
    slots_[user].clear();

    // The first path is always kept; later ones must lower the AIC of the user.
    double aic_best = 0.0;
    std::size_t failures = 0;
    for (std::size_t L = 1; L <= config_.L_max; ++L)
    {
        add_path(user);
        inner_loop(user);
        const double aic = aic_user(user, L);
        if (L == 1 || aic < aic_best)
            aic_best = aic;
        else if (++failures >= config_.m_aic_max)
            break;
    }
}

std::vector<std::size_t> Estimator::select_model_order() const
{
    const std::size_t K = slots_.size();
    std::vector<std::size_t> lo(K), hi(K);
    for (std::size_t k = 0; k < K; ++k)
    {
        hi[k] = slots_[k].size();
        lo[k] = std::min<std::size_t>(1, hi[k]);
    }
    std::vector<std::size_t> L = lo, best = lo;
    double best_value = 0.0;
    std::size_t best_total = 0;
    bool have = false;
    while (true)
    {
        const std::size_t total = std::accumulate(L.begin(), L.end(), std::size_t{0});
        const double value =
            state_.objective_without(masked_beyond(L)) + config_.gamma_aic * static_cast<double>(total);
        // The odometer runs in lexicographic order, so only strict improvements replace a tie.
        if (!have || value < best_value || (value == best_value && total < best_total))
        {
            best_value = value;
            best_total = total;
            best = L;
            have = true;
        }
        std::size_t k = K;
        while (k > 0)
        {
            --k;
            if (L[k] < hi[k])
            {
                ++L[k];
                break;
            }
            L[k] = lo[k];
            if (k == 0)
                return best;
        }
        if (K == 0)
            return best;
    }
}

EstimateResult Estimator::run()
{
    for (std::size_t k : config_.schedule(slots_.size()))
    {
        estimate_user(k);
        telemetry_.objective_trace.push_back(state_.objective());
        if (config_.stop_at_optimality && state_.objective() <= optimality_threshold())
        {
            telemetry_.reached_optimality = true;
            break;
        }
    }
    state_.recompute();

    EstimateResult res;
    res.L_est = select_model_order();
    res.paths.resize(slots_.size());
    for (std::size_t k = 0; k < slots_.size(); ++k)
        for (PathId id : by_magnitude(k))
        {
            const PathRecord &rec = state_.path(id);
            res.paths[k].push_back(to_path_params(rec.gain, rec.geometry));
        }
    res.objective = state_.objective();
    res.selected_objective = state_.objective_without(masked_beyond(res.L_est));
    res.telemetry = telemetry_;
    return res;
}

EstimateResult estimate(std::shared_ptr<const Observation> obs, const EstimatorConfig &config)
{
    return Estimator(std::move(obs), config).run();
}

EstimateResult estimate(const Scenario &scenario, const EstimatorConfig &config)
{
    return estimate(Observation::from_scenario(scenario), config);
}

} // namespace pce
