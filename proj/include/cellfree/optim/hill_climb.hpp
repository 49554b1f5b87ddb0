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
#include <functional>

namespace cellfree::optim {

struct HillClimbOptions {
    double initial_step = 0.1;
    double shrink = 3.0;
    double min_step = 1e-4;
};

struct HillClimbResult {
    double argmax = 0.0;
    double value = 0.0;
    int evaluations = 0;
    double final_step = 0.0;
};

/// One-dimensional hill climbing on [lo, hi].
///
/// Walks from init towards hi. Whenever a move fails to improve on the previous
/// point (or is blocked by a bound) the step is divided by `shrink` and
/// reversed. Stops when |step| < min_step and returns the best point visited.
inline HillClimbResult hill_climb(const std::function<double(double)>& f, double lo, double hi, double init,
                                  const HillClimbOptions& opt = {})
{
    double x = std::clamp(init, lo, hi);
    double fx = f(x);
    HillClimbResult res{x, fx, 1, opt.initial_step};
    double step = opt.initial_step;
    while (std::abs(step) >= opt.min_step) {
        const double xn = std::clamp(x + step, lo, hi);
        if (xn == x) {
            step = -step / opt.shrink;
            continue;
        }
        const double fn = f(xn);
        ++res.evaluations;
        if (fn > res.value) {
            res.value = fn;
            res.argmax = xn;
        }
        if (!(fn > fx))
            step = -step / opt.shrink;
        x = xn;
        fx = fn;
    }
    res.final_step = step;
    return res;
}

} // namespace cellfree::optim
