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
#include <cstdint>
#include <random>

#include "cellfree/types.hpp"

namespace cellfree {

using Rng = std::mt19937_64;

/// Independent random stream roles within one drop.
enum class Stage : std::uint64_t {
    Geometry = 1,
    Shadowing = 2,
    SmallScale = 3,
    PilotNoise = 4,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stateless seed derivation from (master seed, drop, stage, attempt).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t drop, Stage stage,
                                    std::uint64_t attempt = 0) noexcept
{
    std::uint64_t s = mix64(master);
    s = mix64(s ^ drop);
    s = mix64(s ^ static_cast<std::uint64_t>(stage));
    return mix64(s ^ attempt);
}

inline Rng make_stream(std::uint64_t master, std::uint64_t drop, Stage stage, std::uint64_t attempt = 0)
{
    return Rng{derive_seed(master, drop, stage, attempt)};
}

/// Circularly-symmetric complex Gaussian with unit variance.
inline cdouble complex_normal(Rng& rng)
{
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

inline CMat complex_normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng)
{
    CMat out(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            out(r, c) = complex_normal(rng);
    return out;
}

} // namespace cellfree
