// SPDX-License-Identifier: Apache-2.0
//
// cellfree-tpc: uplink transmit power control for cell-free massive MIMO
// Copyright (C) 2026 The cellfree-tpc authors
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

#pragma once

#include <cmath>
#include <optional>

#include "cellfree/types.hpp"
#include "cellfree/zf_receiver.hpp"

namespace cellfree::optim {

/// Per-UE SINR floors, gamma_k = 2^{S_k} - 1.
using SinrTargets = Vec;

inline SinrTargets se_floor_to_sinr(double se_floor, int num_ues)
{
    return Vec::Constant(num_ues, std::exp2(se_floor) - 1.0);
}

struct YatesOptions {
    double rel_tol = 1e-13;  // per-component relative change
    int max_iterations = 10000;
    double cap_slack = 1e-12; // relative slack before an iterate counts as over the cap
};

/// Componentwise-minimal allocation meeting SINR_k(q) = gamma_k, by the
/// standard-interference-function fixed point started from q = 0.
///
/// Returns nullopt when an iterate exceeds q_max: the iterates grow
/// monotonically towards the minimal fixed point, so that point is over the
/// cap as well.
inline std::optional<PowerAllocation> yates_min_power(const SinrCoefficients& c, const SinrTargets& targets,
                                                      const Vec& q_max, const YatesOptions& opt = {},
                                                      int* iterations = nullptr)
{
    const int K = c.size();
    const Mat gain = targets.asDiagonal() * c.b;
    const Vec offset = targets.cwiseProduct(c.n) / c.rho;
    const Vec limit = q_max * (1.0 + opt.cap_slack);

    Vec q = Vec::Zero(K);
    Vec next(K);
    bool converged = false;
    int it = 0;
    while (it < opt.max_iterations) {
        ++it;
        next.noalias() = gain * q;
        next += offset;
        if ((next.array() > limit.array()).any()) {
            if (iterations)
                *iterations = it;
            return std::nullopt;
        }
        converged = ((next - q).cwiseAbs().array() <= opt.rel_tol * next.array()).all();
        q.swap(next);
        if (converged)
            break;
    }
    if (iterations)
        *iterations = it;

    if (!converged) {
        // Slow contraction: the iterates stayed under the cap, so the fixed
        // point exists; solve for it directly.
        const Mat a = Mat::Identity(K, K) - gain;
        Vec exact = a.partialPivLu().solve(offset);
        if (!exact.allFinite() || (exact.array() < 0.0).any() || (exact.array() > limit.array()).any())
            return std::nullopt;
        q = exact;
    }
    return q.cwiseMin(q_max);
}

} // namespace cellfree::optim
