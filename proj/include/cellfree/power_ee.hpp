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

#include "cellfree/types.hpp"
#include "cellfree/zf_receiver.hpp"

namespace cellfree {

inline constexpr double bits_per_gbit = 1e9;

struct PowerModelParams {
    double pbar_w = 0.2;        // maximum UE transmit power
    double p_ue_w = 0.1;        // UE circuit power
    double p_fix_ap_w = 0.0825;
    double p_bh_ap_w = 0.1;
    double p_fix_ant_w = 0.743;
    double p_bh_ant_w = 0.9;
    double bandwidth_hz = 20e6;
    Vec weights;                // per-UE; empty means all ones

    double per_ap_w() const { return p_fix_ap_w + p_bh_ap_w; }
    double per_antenna_w() const { return p_fix_ant_w + p_bh_ant_w; }

    double weight(int k) const { return weights.size() == 0 ? 1.0 : weights(k); }

    Vec weight_vector(int num_ues) const { return weights.size() == 0 ? Vec::Ones(num_ues) : weights; }

    void validate(int num_ues) const
    {
        if (!(pbar_w > 0.0))
            throw ConfigError("pbar_w must be positive");
        if (!(p_ue_w >= 0.0) || !(p_fix_ap_w >= 0.0) || !(p_bh_ap_w >= 0.0) || !(p_fix_ant_w >= 0.0)
            || !(p_bh_ant_w >= 0.0))
            throw ConfigError("power consumption terms must be non-negative");
        if (!(bandwidth_hz > 0.0))
            throw ConfigError("bandwidth_hz must be positive");
        if (weights.size() != 0) {
            if (weights.size() != num_ues)
                throw ConfigError("ue_weights must have one entry per UE");
            if (!(weights.array() > 0.0).all())
                throw ConfigError("ue_weights must be positive");
        }
    }
};

/// Network power consumption in watts.
inline double total_power(const PowerAllocation& q, const PowerModelParams& p, int num_aps, int num_antennas,
                          int num_ues)
{
    return p.pbar_w * q.sum() + num_ues * p.p_ue_w + num_aps * p.per_ap_w() + num_antennas * p.per_antenna_w();
}

/// Whole-network EE in bit/J.
inline double total_ee(const Vec& se, const PowerAllocation& q, const PowerModelParams& p, int num_aps,
                       int num_antennas, int num_ues)
{
    return p.bandwidth_hz * p.weight_vector(num_ues).dot(se) / total_power(q, p, num_aps, num_antennas, num_ues);
}

/// EE of one UE in bit/J; infrastructure power does not enter.
inline double per_ue_ee(double se, double q, const PowerModelParams& p, int k = 0)
{
    return p.bandwidth_hz * p.weight(k) * se / (p.pbar_w * q + p.p_ue_w);
}

inline Vec per_ue_ee(const Vec& se, const PowerAllocation& q, const PowerModelParams& p)
{
    Vec out(se.size());
    for (Eigen::Index k = 0; k < se.size(); ++k)
        out(k) = per_ue_ee(se(k), q(k), p, static_cast<int>(k));
    return out;
}

} // namespace cellfree
