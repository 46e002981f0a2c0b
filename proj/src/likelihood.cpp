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

#include "pce/likelihood.hpp"

#include "signal.hpp"

namespace pce
{

Observation::Observation(ReceivedTensor y, std::vector<PilotTensor> pilots, double N0)
    : y_(std::move(y)), pilots_(std::move(pilots)), N0_(N0)
{
    if (!(N0_ > 0.0))
        throw Error(ErrorCode::invalid_argument, "N0 must be positive");
    if (pilots_.empty())
        throw Error(ErrorCode::invalid_argument, "at least one user is required");
    dims_ = {y_.dim0(), y_.dim1(), y_.dim2(), pilots_.front().dim2()};
    for (const auto &x : pilots_)
        if (x.dim0() != dims_.Nc || x.dim1() != dims_.Ns || x.dim2() != dims_.Nt)
            throw Error(ErrorCode::dimension_mismatch, "pilot tensor shape does not match the received tensor");
    for (const auto &x : pilots_)
        isotropy_.push_back(check_isotropy(x));
}

std::shared_ptr<const Observation> Observation::from_scenario(const Scenario &sc)
{
    return std::make_shared<const Observation>(sc.received, sc.pilots, sc.config.N0);
}

bool Observation::isotropic(std::size_t user) const { return isotropy_deviation(user) <= isotropy_tolerance; }

Regressor build_regressor(const Harmonics &h, const PilotTensor &pilots, const Dims &dims)
{
    Regressor r;
    r.alpha = Tensor3(dims.Nc, dims.Ns, dims.Nr);
    detail::write_path(r.alpha, 1.0, h, pilots, false);
    for (const cd &v : r.alpha.values())
        r.energy += std::norm(v);
    if (!(r.energy > 0.0))
        throw Error(ErrorCode::degenerate, "regressor has zero energy");
    return r;
}

Projection project(const Tensor3 &r, const Harmonics &h, const PilotTensor &pilots)
{
    const std::size_t Nc = r.dim0(), Ns = r.dim1(), Nr = r.dim2();
    const std::vector<cd> e1 = detail::phase_ramp(h.omega1, Nc), e2 = detail::phase_ramp(h.omega2, Ns),
                          e3 = detail::phase_ramp(h.psi, Nr);
    const std::vector<cd> s = detail::beamformed_pilots(pilots, h.chi);
    cd inner = 0.0;
    double grid_energy = 0.0;
    const cd *p = r.data();
    for (std::size_t n = 0; n < Nc; ++n)
        for (std::size_t t = 0; t < Ns; ++t)
        {
            cd w = 0.0;
            for (std::size_t u = 0; u < Nr; ++u)
                w += std::conj(e3[u]) * *p++;
            const cd a = e1[n] * e2[t] * s[n * Ns + t];
            inner += std::conj(a) * w;
            grid_energy += std::norm(s[n * Ns + t]);
        }
    return {inner, grid_energy * static_cast<double>(Nr)};
}

ResidualState::ResidualState(std::shared_ptr<const Observation> obs) : obs_(std::move(obs))
{
    if (!obs_)
        throw Error(ErrorCode::invalid_argument, "null observation");
    residual_ = obs_->y();
    refresh_objective();
}

PathRecord &ResidualState::record(PathId id)
{
    if (!has_path(id))
        throw Error(ErrorCode::invalid_argument, "unknown path id " + std::to_string(id));
    return *paths_[id];
}

const PathRecord &ResidualState::path(PathId id) const
{
    if (!has_path(id))
        throw Error(ErrorCode::invalid_argument, "unknown path id " + std::to_string(id));
    return *paths_[id];
}

void ResidualState::refresh_objective()
{
    double e = 0.0;
    for (const cd &v : residual_.values())
        e += std::norm(v);
    energy_ = e;
    objective_ = e / obs_->N0();
}

void ResidualState::count_update()
{
    if (++updates_since_recompute_ >= recompute_interval)
        recompute();
    else
        refresh_objective();
}

PathId ResidualState::add_path(std::size_t user, cd gain, const Harmonics &h)
{
    if (user >= obs_->users())
        throw Error(ErrorCode::invalid_argument, "user index out of range");
    PathRecord rec;
    rec.user = user;
    paths_.push_back(std::move(rec));
    const PathId id = paths_.size() - 1;
    set_path(id, gain, h);
    return id;
}

void ResidualState::set_path(PathId id, cd gain, const Harmonics &h)
{
    PathRecord &rec = record(id);
    const Dims &d = obs_->dims();
    if (rec.contribution.size() == 0)
        rec.contribution = Tensor3(d.Nc, d.Ns, d.Nr);
    cd *r = residual_.data();
    cd *c = rec.contribution.data();
    const std::size_t N = residual_.size();
    if (rec.attached)
        for (std::size_t i = 0; i < N; ++i)
            r[i] += c[i];
    rec.gain = gain;
    rec.geometry = h;
    detail::write_path(rec.contribution, gain, h, obs_->pilots(rec.user), false);
    for (std::size_t i = 0; i < N; ++i)
        r[i] -= c[i];
    rec.attached = true;
    count_update();
}

void ResidualState::detach(PathId id)
{
    PathRecord &rec = record(id);
    if (!rec.attached)
        return;
    cd *r = residual_.data();
    const cd *c = rec.contribution.data();
    for (std::size_t i = 0; i < residual_.size(); ++i)
        r[i] += c[i];
    rec.attached = false;
    refresh_objective();
}

void ResidualState::attach(PathId id)
{
    PathRecord &rec = record(id);
    if (rec.attached)
        return;
    set_path(id, rec.gain, rec.geometry);
}

void ResidualState::set_geometry(PathId id, const Harmonics &h)
{
    PathRecord &rec = record(id);
    if (rec.attached)
        throw Error(ErrorCode::invalid_argument, "path must be detached from the residual");
    rec.geometry = h;
}

void ResidualState::remove_path(PathId id)
{
    detach(id);
    paths_[id].reset();
}

void ResidualState::clear_user(std::size_t user)
{
    for (PathId id : paths_of(user))
        remove_path(id);
}

std::vector<PathId> ResidualState::paths_of(std::size_t user) const
{
    std::vector<PathId> ids;
    for (PathId id = 0; id < paths_.size(); ++id)
        if (paths_[id] && paths_[id]->user == user)
            ids.push_back(id);
    return ids;
}

std::vector<PathId> ResidualState::path_ids() const
{
    std::vector<PathId> ids;
    for (PathId id = 0; id < paths_.size(); ++id)
        if (paths_[id])
            ids.push_back(id);
    return ids;
}

double ResidualState::objective_without(const std::vector<PathId> &masked) const
{
    if (masked.empty())
        return objective_;
    std::vector<const cd *> extra;
    for (PathId id : masked)
    {
        const PathRecord &rec = path(id);
        if (rec.attached)
            extra.push_back(rec.contribution.data());
    }
    double e = 0.0;
    const cd *r = residual_.data();
    for (std::size_t i = 0; i < residual_.size(); ++i)
    {
        cd v = r[i];
        for (const cd *c : extra)
            v += c[i];
        e += std::norm(v);
    }
    return e / obs_->N0();
}

void ResidualState::recompute()
{
    residual_ = obs_->y();
    cd *r = residual_.data();
    for (auto &rec : paths_)
    {
        if (!rec || !rec->attached)
            continue;
        const cd *c = rec->contribution.data();
        for (std::size_t i = 0; i < residual_.size(); ++i)
            r[i] -= c[i];
    }
    updates_since_recompute_ = 0;
    refresh_objective();
}

double ResidualState::recomputed_objective() const
{
    Tensor3 r = obs_->y();
    for (const auto &rec : paths_)
    {
        if (!rec || !rec->attached)
            continue;
        Tensor3 c(r.dim0(), r.dim1(), r.dim2());
        detail::write_path(c, rec->gain, rec->geometry, obs_->pilots(rec->user), false);
        for (std::size_t i = 0; i < r.size(); ++i)
            r.values()[i] -= c.values()[i];
    }
    double e = 0.0;
    for (const cd &v : r.values())
        e += std::norm(v);
    return e / obs_->N0();
}

static const PathRecord &detached_path(const ResidualState &state, PathId id)
{
    const PathRecord &rec = state.path(id);
    if (rec.attached)
        throw Error(ErrorCode::invalid_argument, "path must be detached from the residual");
    return rec;
}

cd solve_gain(const ResidualState &state, PathId id)
{
    const PathRecord &rec = detached_path(state, id);
    const Projection p = project(state.residual(), rec.geometry, state.observation().pilots(rec.user));
    if (!(p.energy > 0.0))
        throw Error(ErrorCode::degenerate, "regressor has zero energy");
    return p.inner / p.energy;
}

double concentrated_objective(const ResidualState &state, PathId id, const Harmonics &candidate)
{
    const PathRecord &rec = detached_path(state, id);
    const Projection p = project(state.residual(), candidate, state.observation().pilots(rec.user));
    if (!(p.energy > 0.0))
        throw Error(ErrorCode::degenerate, "regressor has zero energy");
    const double value = state.residual_energy() - std::norm(p.inner) / p.energy;
    return value / state.observation().N0();
}

} // namespace pce
