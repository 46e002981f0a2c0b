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

#ifndef PCE_SRC_SIGNAL_HPP
#define PCE_SRC_SIGNAL_HPP

// Shared kernels for building single-path signals. Internal to the library.

#include "pce/types.hpp"

#include <vector>

namespace pce::detail
{

// exp(j step i), i = 0..N-1. Each entry is evaluated directly, not by recursion.
inline std::vector<cd> phase_ramp(double step, std::size_t N)
{
    std::vector<cd> r(N);
    for (std::size_t i = 0; i < N; ++i)
        r[i] = std::polar(1.0, step * static_cast<double>(i));
    return r;
}

// s_nt = a(theta)^T x_nt for tx phase step chi = pi sin(theta), flattened over (n, t).
inline std::vector<cd> beamformed_pilots(const PilotTensor &x, double chi)
{
    const std::size_t grid = x.dim0() * x.dim1(), Nt = x.dim2();
    const std::vector<cd> a = phase_ramp(-chi, Nt);
    std::vector<cd> s(grid);
    const cd *p = x.data();
    for (std::size_t i = 0; i < grid; ++i, p += Nt)
    {
        cd acc = 0.0;
        for (std::size_t v = 0; v < Nt; ++v)
            acc += a[v] * p[v];
        s[i] = acc;
    }
    return s;
}

// out(n,t,u) = scale * exp(j w1 n) exp(j w2 t) exp(j psi u) s_nt, or accumulated into out when accumulate is set.
inline void write_path(Tensor3 &out, cd scale, const Harmonics &h, const PilotTensor &x, bool accumulate)
{
    const std::size_t Nc = out.dim0(), Ns = out.dim1(), Nr = out.dim2();
    const std::vector<cd> e1 = phase_ramp(h.omega1, Nc), e2 = phase_ramp(h.omega2, Ns), e3 = phase_ramp(h.psi, Nr);
    const std::vector<cd> s = beamformed_pilots(x, h.chi);
    cd *o = out.data();
    for (std::size_t n = 0; n < Nc; ++n)
        for (std::size_t t = 0; t < Ns; ++t)
        {
            const cd c = scale * e1[n] * e2[t] * s[n * Ns + t];
            if (accumulate)
                for (std::size_t u = 0; u < Nr; ++u)
                    *o++ += c * e3[u];
            else
                for (std::size_t u = 0; u < Nr; ++u)
                    *o++ = c * e3[u];
        }
}

} // namespace pce::detail

#endif
