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

#include <algorithm>
#include <cmath>
#include <optional>

#include "cellfree/optim/yates.hpp"

namespace cellfree::optim {

struct MaxMinSolution {
    PowerAllocation q;
    double level = 0.0; // common SINR level of a unit-weight UE
    int iterations = 0;
};

struct BisectionOptions {
    double rel_tol = 1e-12;
    int max_iterations = 200;
    YatesOptions yates;
};

namespace detail {

// SINR target of each UE at level t: a UE with normalized weight w gets
// (1 + t)^(1/w) - 1 so that w log2(1 + SINR) is equal across UEs.
class LevelMap {
public:
    LevelMap(const SinrTargets& floor, const Vec& weights) : floor_(floor)
    {
        if (weights.size() != 0 && !(weights.array() == weights(0)).all())
            inv_w_ = weights.minCoeff() * weights.cwiseInverse();
    }

    SinrTargets targets(double t) const
    {
        if (inv_w_.size() == 0)
            return floor_.cwiseMax(t);
        SinrTargets out(floor_.size());
        for (Eigen::Index k = 0; k < out.size(); ++k)
            out(k) = std::max(floor_(k), std::expm1(inv_w_(k) * std::log1p(t)));
        return out;
    }

    // Largest level at which UE k's target stays below sinr.
    double level_for(Eigen::Index k, double sinr) const
    {
        if (inv_w_.size() == 0)
            return sinr;
        return std::expm1(std::log1p(sinr) / inv_w_(k));
    }

private:
    SinrTargets floor_;
    Vec inv_w_;
};

} // namespace detail

/// Max-min SINR subject to q <= q_max and SINR_k >= floor_k.
///
/// Bisects the common level t; each candidate is checked with the minimal-power
/// fixed point. The upper end of the bracket is the interference-free bound
/// min_k rho q_max_k / n_k. With non-uniform weights the levels are weighted
/// spectral efficiencies (see detail::LevelMap). Returns nullopt only when the
/// floor itself cannot be met.
inline std::optional<MaxMinSolution> maxmin_sinr_bisection(const SinrCoefficients& c, const Vec& q_max,
                                                            const SinrTargets& floor, const Vec& weights = {},
                                                            const BisectionOptions& opt = {})
{
    const int K = c.size();
    const detail::LevelMap map(floor, weights);

    auto q_floor = yates_min_power(c, floor, q_max, opt.yates);
    if (!q_floor)
        return std::nullopt;

    double lo = std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
        lo = std::min(lo, map.level_for(k, floor(k)));
        hi = std::min(hi, map.level_for(k, c.rho * q_max(k) / c.n(k)));
    }
    hi = std::max(hi, lo);

    MaxMinSolution best{*q_floor, lo, 0};
    if (auto q_hi = yates_min_power(c, map.targets(hi), q_max, opt.yates))
        return MaxMinSolution{*q_hi, hi, 0};

    int it = 0;
    while (hi - lo > opt.rel_tol * hi && it < opt.max_iterations) {
        ++it;
        const double mid = 0.5 * (lo + hi);
        if (auto q = yates_min_power(c, map.targets(mid), q_max, opt.yates)) {
            lo = mid;
            best.q = std::move(*q);
        } else {
            hi = mid;
        }
    }
    best.level = lo;
    best.iterations = it;
    return best;
}

} // namespace cellfree::optim
