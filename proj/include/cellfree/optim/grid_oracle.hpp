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

// Exhaustive lattice search over [0, 1]^K, used as an independent reference
// for the power-control solvers on small instances.

#include <cmath>
#include <functional>
#include <optional>

#include "cellfree/types.hpp"

namespace cellfree::optim {

struct GridPoint {
    Vec q;
    double value = 0.0;
};

/// The objective returns nullopt for lattice points that violate the constraints.
inline std::optional<GridPoint> grid_oracle(int num_ues, double step,
                                            const std::function<std::optional<double>(const Vec&)>& objective)
{
    if (num_ues < 1 || num_ues > 3)
        throw ConfigError("grid_oracle supports 1 to 3 UEs");
    if (!(step > 0.0) || step > 1.0)
        throw ConfigError("grid_oracle step must lie in (0, 1]");
    const auto last = static_cast<long>(std::floor(1.0 / step + 1e-9));
    auto coord = [&](long i) { return i == last ? 1.0 : std::min(1.0, static_cast<double>(i) * step); };

    std::optional<GridPoint> best;
    std::vector<long> idx(static_cast<std::size_t>(num_ues), 0);
    Vec q(num_ues);
    while (true) {
        for (int k = 0; k < num_ues; ++k)
            q(k) = coord(idx[static_cast<std::size_t>(k)]);
        if (auto v = objective(q); v && (!best || *v > best->value))
            best = GridPoint{q, *v};
        int k = 0;
        while (k < num_ues && ++idx[static_cast<std::size_t>(k)] > last)
            idx[static_cast<std::size_t>(k++)] = 0;
        if (k == num_ues)
            break;
    }
    return best;
}

} // namespace cellfree::optim
