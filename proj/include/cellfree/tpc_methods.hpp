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
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "cellfree/optim/bisection.hpp"
#include "cellfree/optim/gp_product_sinr.hpp"
#include "cellfree/optim/hill_climb.hpp"
#include "cellfree/optim/yates.hpp"
#include "cellfree/power_ee.hpp"
#include "cellfree/zf_receiver.hpp"

namespace cellfree {

enum class TpcMethod { MaxPower, MaxMinSE, MaxTotalEE, MaxMinEE };

inline std::string_view to_string(TpcMethod m)
{
    switch (m) {
    case TpcMethod::MaxPower: return "MaxPower";
    case TpcMethod::MaxMinSE: return "MaxMinSE";
    case TpcMethod::MaxTotalEE: return "MaxTotalEE";
    case TpcMethod::MaxMinEE: return "MaxMinEE";
    }
    return "?";
}

inline std::optional<TpcMethod> parse_method(std::string_view s)
{
    for (auto m : {TpcMethod::MaxPower, TpcMethod::MaxMinSE, TpcMethod::MaxTotalEE, TpcMethod::MaxMinEE})
        if (to_string(m) == s)
            return m;
    return std::nullopt;
}

struct NetworkSize {
    int num_aps = 1;
    int num_antennas = 1;
    int num_ues = 1;
};

struct SolveDiagnostics {
    int iterations = 0;
    bool converged = true;
    double objective = 0.0;
    bool feasible = true;
    double outer_variable = std::numeric_limits<double>::quiet_NaN(); // upsilon or nu
    double sum_log1p_sinr = std::numeric_limits<double>::quiet_NaN();
};

struct TpcResult {
    TpcMethod method = TpcMethod::MaxPower;
    PowerAllocation q;
    Vec se;        // bit/s/Hz
    Vec ee_per_ue; // bit/J
    double ee_total = 0.0;
    bool outage = false;
    SolveDiagnostics diagnostics;
};

struct TpcOptions {
    optim::HillClimbOptions climb;
    optim::BisectionOptions bisection;
    optim::GpOptions gp;
};

/// Fill SE and EE metrics for an allocation.
inline TpcResult evaluate_allocation(TpcMethod method, const SinrCoefficients& c, const PowerAllocation& q,
                                     const PowerModelParams& p, const NetworkSize& size)
{
    TpcResult r;
    r.method = method;
    r.q = q;
    r.se = spectral_efficiency(c, q);
    r.ee_per_ue = per_ue_ee(r.se, q, p);
    r.ee_total = total_ee(r.se, q, p, size.num_aps, size.num_antennas, size.num_ues);
    return r;
}

inline TpcResult max_power(const SinrCoefficients& c, const PowerModelParams& p, const NetworkSize& size)
{
    TpcResult r = evaluate_allocation(TpcMethod::MaxPower, c, Vec::Ones(c.size()), p, size);
    r.diagnostics.objective = r.se.minCoeff();
    return r;
}

inline TpcResult max_min_se(const SinrCoefficients& c, const PowerModelParams& p, const NetworkSize& size,
                            const TpcOptions& opt = {})
{
    const int K = c.size();
    auto sol = optim::maxmin_sinr_bisection(c, Vec::Ones(K), Vec::Zero(K), {}, opt.bisection);
    // A zero floor is always feasible (q = 0).
    TpcResult r = evaluate_allocation(TpcMethod::MaxMinSE, c, sol->q, p, size);
    r.diagnostics.iterations = sol->iterations;
    r.diagnostics.objective = r.se.minCoeff();
    return r;
}

namespace detail {

inline TpcResult outage_fallback(TpcMethod method, const SinrCoefficients& c, const PowerModelParams& p,
                                 const NetworkSize& size, const TpcOptions& opt)
{
    TpcResult r = max_min_se(c, p, size, opt);
    r.method = method;
    r.outage = true;
    r.diagnostics.feasible = false;
    return r;
}

} // namespace detail

/// Max total EE with per-UE SE floor s_r. The transmit-power sum in the
/// denominator is replaced by upsilon K; upsilon is searched by hill climbing on
/// [upsilon*, 1] and each candidate solves the product-of-SINR program.
inline TpcResult max_total_ee(const SinrCoefficients& c, double s_r, const PowerModelParams& p,
                              const NetworkSize& size, const TpcOptions& opt = {})
{
    const int K = c.size();
    const optim::SinrTargets floor = optim::se_floor_to_sinr(s_r, K);
    const Vec cap = Vec::Ones(K);
    const auto q_min = optim::yates_min_power(c, floor, cap, opt.bisection.yates);
    if (!q_min)
        return detail::outage_fallback(TpcMethod::MaxTotalEE, c, p, size, opt);

    const Vec w = p.weight_vector(K);
    const double fixed = K * p.p_ue_w + size.num_aps * p.per_ap_w() + size.num_antennas * p.per_antenna_w();
    const double slack = std::min(1.0, q_min->sum() / K);

    std::optional<optim::GpSolution> best;
    double best_value = -std::numeric_limits<double>::infinity();
    auto objective = [&](double upsilon) {
        auto sol = optim::gp_max_product_sinr(c, floor, upsilon * K, 1.0, w, opt.gp);
        if (!sol)
            return -std::numeric_limits<double>::infinity();
        const double value = p.bandwidth_hz * w.dot(spectral_efficiency(c, sol->q)) / (p.pbar_w * upsilon * K + fixed);
        if (value > best_value) {
            best_value = value;
            best = std::move(sol);
        }
        return value;
    };
    const auto climb = optim::hill_climb(objective, slack, 1.0, slack, opt.climb);

    TpcResult r = evaluate_allocation(TpcMethod::MaxTotalEE, c, best ? best->q : *q_min, p, size);
    r.diagnostics.iterations = climb.evaluations;
    r.diagnostics.objective = climb.value;
    r.diagnostics.outer_variable = climb.argmax;
    r.diagnostics.converged = best && best->converged;
    if (best)
        r.diagnostics.sum_log1p_sinr = best->sum_log1p_sinr;
    return r;
}

/// Inner max-min EE problem at a fixed nu: weighted max-min SE with q_k <= nu
/// and the SE floor. Returns nullopt when the floor is unreachable under the cap.
inline std::optional<optim::MaxMinSolution> max_min_ee_inner(const SinrCoefficients& c, double s_r, double nu,
                                                             const PowerModelParams& p, const TpcOptions& opt = {})
{
    const int K = c.size();
    return optim::maxmin_sinr_bisection(c, Vec::Constant(K, nu), optim::se_floor_to_sinr(s_r, K),
                                        p.weight_vector(K), opt.bisection);
}

/// Minimum per-UE EE with every denominator replaced by pbar * nu + P_U.
inline double common_denominator_min_ee(const SinrCoefficients& c, const PowerAllocation& q, double nu,
                                        const PowerModelParams& p)
{
    const Vec se = spectral_efficiency(c, q);
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < c.size(); ++k)
        m = std::min(m, p.bandwidth_hz * p.weight(k) * se(k) / (p.pbar_w * nu + p.p_ue_w));
    return m;
}

/// Max-min per-UE EE with SE floor s_r: hill climbing over nu in [nu*, 1],
/// nu* = max_k of the minimal-power allocation. Reported EE uses each UE's
/// own transmit power.
inline TpcResult max_min_ee(const SinrCoefficients& c, double s_r, const PowerModelParams& p,
                            const NetworkSize& size, const TpcOptions& opt = {})
{
    const int K = c.size();
    const auto q_min =
        optim::yates_min_power(c, optim::se_floor_to_sinr(s_r, K), Vec::Ones(K), opt.bisection.yates);
    if (!q_min)
        return detail::outage_fallback(TpcMethod::MaxMinEE, c, p, size, opt);

    const double slack = std::min(1.0, q_min->maxCoeff());
    std::optional<PowerAllocation> best;
    double best_value = -std::numeric_limits<double>::infinity();
    auto objective = [&](double nu) {
        auto sol = max_min_ee_inner(c, s_r, nu, p, opt);
        if (!sol)
            return -std::numeric_limits<double>::infinity();
        const double value = common_denominator_min_ee(c, sol->q, nu, p);
        if (value > best_value) {
            best_value = value;
            best = std::move(sol->q);
        }
        return value;
    };
    const auto climb = optim::hill_climb(objective, slack, 1.0, slack, opt.climb);

    TpcResult r = evaluate_allocation(TpcMethod::MaxMinEE, c, best ? *best : *q_min, p, size);
    r.diagnostics.iterations = climb.evaluations;
    r.diagnostics.objective = climb.value;
    r.diagnostics.outer_variable = climb.argmax;
    return r;
}

/// Max-min EE inner solution at a prescribed nu (no outer search). When the
/// floor is unreachable under the cap, falls back to max-min SE under the same
/// cap and flags an outage.
inline TpcResult max_min_ee_fixed_nu(const SinrCoefficients& c, double s_r, double nu, const PowerModelParams& p,
                                     const NetworkSize& size, const TpcOptions& opt = {})
{
    const int K = c.size();
    bool outage = false;
    auto sol = max_min_ee_inner(c, s_r, nu, p, opt);
    if (!sol) {
        outage = true;
        sol = optim::maxmin_sinr_bisection(c, Vec::Constant(K, nu), Vec::Zero(K), p.weight_vector(K), opt.bisection);
    }
    TpcResult r = evaluate_allocation(TpcMethod::MaxMinEE, c, sol->q, p, size);
    r.outage = outage;
    r.diagnostics.feasible = !outage;
    r.diagnostics.iterations = sol->iterations;
    r.diagnostics.objective = common_denominator_min_ee(c, sol->q, nu, p);
    r.diagnostics.outer_variable = nu;
    return r;
}

} // namespace cellfree
