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

#include "signal.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace pce
{

namespace
{

// FFTW planning is not thread-safe; execution of an existing plan on fresh aligned buffers is.
fftw_plan forward_plan(int n0, int n1, int n2)
{
    static std::mutex mutex;
    static std::map<std::tuple<int, int, int>, fftw_plan> plans;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = plans.find({n0, n1, n2});
    if (it != plans.end())
        return it->second;
    auto *buf = fftw_alloc_complex(static_cast<std::size_t>(n0) * n1 * n2);
    fftw_plan p = fftw_plan_dft_3d(n0, n1, n2, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_free(buf);
    plans.emplace(std::make_tuple(n0, n1, n2), p);
    return p;
}

struct FftBuffer
{
    explicit FftBuffer(std::size_t n) : data(fftw_alloc_complex(n)), size(n)
    {
        std::fill(reinterpret_cast<double *>(data), reinterpret_cast<double *>(data) + 2 * n, 0.0);
    }
    ~FftBuffer() { fftw_free(data); }
    FftBuffer(const FftBuffer &) = delete;
    FftBuffer &operator=(const FftBuffer &) = delete;
    FftBuffer(FftBuffer &&o) noexcept : data(o.data), size(o.size) { o.data = nullptr; }

    cd *values() { return reinterpret_cast<cd *>(data); }

    fftw_complex *data;
    std::size_t size;
};

double bin_phase(std::size_t k, std::size_t n) { return wrap_angle(2.0 * pi * static_cast<double>(k) / double(n)); }

} // namespace

Harmonics beamspace_peak(const Tensor3 &residual, const PilotTensor &pilots)
{
    const std::size_t Nc = residual.dim0(), Ns = residual.dim1(), Nr = residual.dim2(), Nt = pilots.dim2();
    if (pilots.dim0() != Nc || pilots.dim1() != Ns)
        throw Error(ErrorCode::dimension_mismatch, "pilot grid does not match the residual");
    const std::size_t P0 = 2 * Nc, P1 = 2 * Ns, P2 = 2 * Nr, P = P0 * P1 * P2;
    const fftw_plan plan = forward_plan(int(P0), int(P1), int(P2));

    // F_v(k) = sum_ntu conj(x_ntv) r_ntu exp(-j 2 pi (k0 n / P0 + k1 t / P1 + k2 u / P2)); the matched filter
    // at transmit phase chi is then sum_v exp(j v chi) F_v.
    std::vector<FftBuffer> F;
    F.reserve(Nt);
    for (std::size_t v = 0; v < Nt; ++v)
    {
        F.emplace_back(P);
        cd *b = F.back().values();
        bool any = false;
        for (std::size_t n = 0; n < Nc; ++n)
            for (std::size_t t = 0; t < Ns; ++t)
            {
                const cd xc = std::conj(pilots(n, t, v));
                if (xc == cd{})
                    continue;
                any = true;
                const cd *r = &residual(n, t, 0);
                cd *o = b + (n * P1 + t) * P2;
                for (std::size_t u = 0; u < Nr; ++u)
                    o[u] = xc * r[u];
            }
        if (any)
            fftw_execute_dft(plan, F.back().data, F.back().data);
    }

    const std::size_t G = 2 * Nt;
    double best = -1.0;
    Harmonics h;
    std::vector<cd> w(Nt);
    for (std::size_t j = 0; j < G; ++j)
    {
        const double chi = bin_phase(j, G);
        double energy = 0.0;
        for (const cd &s : detail::beamformed_pilots(pilots, chi))
            energy += std::norm(s);
        energy *= static_cast<double>(Nr);
        if (!(energy > 0.0))
            continue;
        for (std::size_t v = 0; v < Nt; ++v)
            w[v] = std::polar(1.0, chi * static_cast<double>(v));
        std::size_t arg = 0;
        double peak = -1.0;
        for (std::size_t i = 0; i < P; ++i)
        {
            cd q = 0.0;
            for (std::size_t v = 0; v < Nt; ++v)
                q += w[v] * F[v].values()[i];
            const double s = std::norm(q);
            if (s > peak)
            {
                peak = s;
                arg = i;
            }
        }
        if (peak / energy > best)
        {
            best = peak / energy;
            h.omega1 = bin_phase(arg / (P1 * P2), P0);
            h.omega2 = bin_phase((arg / P2) % P1, P1);
            h.psi = bin_phase(arg % P2, P2);
            h.chi = chi;
        }
    }
    if (best < 0.0)
        throw Error(ErrorCode::degenerate, "pilots carry no energy");
    return h;
}

} // namespace pce
