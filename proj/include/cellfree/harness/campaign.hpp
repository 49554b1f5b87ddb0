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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "cellfree/estimation.hpp"
#include "cellfree/geometry_channel.hpp"
#include "cellfree/harness/config.hpp"
#include "cellfree/harness/records.hpp"
#include "cellfree/harness/statistics.hpp"
#include "cellfree/rng.hpp"
#include "cellfree/tpc_methods.hpp"
#include "cellfree/zf_receiver.hpp"

namespace cellfree::harness {

inline constexpr int max_drop_attempts = 10;

struct DropChannel {
    SinrCoefficients coeffs;
    int attempts = 1;
};

/// Geometry, channel, estimate and ZF coefficients for one drop. A rank-deficient
/// estimate triggers a fresh draw with the attempt counter mixed into the seed.
inline DropChannel drop_coefficients(const CampaignConfig& cfg, std::uint64_t drop)
{
    const int K = cfg.geometry.num_ues;
    const PilotConfig pilots = make_pilot_config(K, cfg.tau_p(), cfg.pilot_snr());
    for (int attempt = 0; attempt < max_drop_attempts; ++attempt) {
        const auto a = static_cast<std::uint64_t>(attempt);
        Rng geo = make_stream(cfg.master_seed, drop, Stage::Geometry, a);
        Rng shadow = make_stream(cfg.master_seed, drop, Stage::Shadowing, a);
        Rng small = make_stream(cfg.master_seed, drop, Stage::SmallScale, a);
        Rng noise = make_stream(cfg.master_seed, drop, Stage::PilotNoise, a);

        const NetworkDrop nd = drop_network(cfg.geometry, geo);
        const LargeScaleModel ls = build_large_scale(nd, cfg.geometry, cfg.propagation, shadow);
        const CMat h = realize_channel(ls, nd, cfg.geometry, small);
        const ChannelSet cs = mmse_estimate(h, pilots, ls.beta_linear, noise);
        const auto w = zf_weights(cs.h_est);
        if (!w)
            continue;
        DropChannel out;
        out.attempts = attempt + 1;
        if (cfg.csi_mode == CsiMode::Statistical)
            out.coeffs = sinr_coefficients_statistical(*w, estimation_stats(ls.beta_linear, pilots).error_var, cfg.rho());
        else
            out.coeffs = sinr_coefficients(*w, cs.h_err, cfg.rho());
        return out;
    }
    throw RuntimeError("drop " + std::to_string(drop) + ": channel estimate rank-deficient after "
                       + std::to_string(max_drop_attempts) + " attempts");
}

inline TpcResult solve_method(const MethodSpec& m, const SinrCoefficients& c, const CampaignConfig& cfg,
                              const TpcOptions& opt = {})
{
    const NetworkSize size = cfg.size();
    if (m.fixed_nu)
        return max_min_ee_fixed_nu(c, cfg.s_r, *m.fixed_nu, cfg.power, size, opt);
    switch (m.method) {
    case TpcMethod::MaxPower: return max_power(c, cfg.power, size);
    case TpcMethod::MaxMinSE: return max_min_se(c, cfg.power, size, opt);
    case TpcMethod::MaxTotalEE: return max_total_ee(c, cfg.s_r, cfg.power, size, opt);
    case TpcMethod::MaxMinEE: return max_min_ee(c, cfg.s_r, cfg.power, size, opt);
    }
    throw ConfigError("unknown method");
}

struct DropOutput {
    std::uint64_t drop = 0;
    int attempts = 1;
    std::vector<DropRecord> records; // method-major, then UE
};

inline DropOutput run_drop(const CampaignConfig& cfg, std::uint64_t drop)
{
    const DropChannel ch = drop_coefficients(cfg, drop);
    DropOutput out;
    out.drop = drop;
    out.attempts = ch.attempts;
    for (const auto& spec : cfg.method_specs()) {
        const TpcResult r = solve_method(spec, ch.coeffs, cfg);
        const std::string label = spec.label();
        for (int k = 0; k < ch.coeffs.size(); ++k) {
            DropRecord rec;
            rec.drop = drop;
            rec.method = label;
            rec.ue = k;
            rec.q = r.q(k);
            rec.se_bps_hz = r.se(k);
            rec.ee_bit_j = r.ee_per_ue(k);
            rec.outage = r.outage;
            rec.outer_var = r.diagnostics.outer_variable;
            rec.ee_total_bit_j = r.ee_total;
            out.records.push_back(std::move(rec));
        }
    }
    return out;
}

struct CampaignResult {
    std::vector<DropRecord> records; // ordered by drop
    AggregateSummary summary;
};

/// Drops are distributed over a pool of workers; every drop owns its random
/// streams, so output does not depend on the thread count.
inline CampaignResult run_campaign(const CampaignConfig& cfg, int threads,
                                   const std::function<void(std::size_t done, std::size_t total)>& progress = {})
{
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto total = static_cast<std::size_t>(cfg.num_drops);
    const int workers = std::max(1, std::min<int>(threads, cfg.num_drops));

    std::vector<DropOutput> outputs(total);
    std::vector<std::exception_ptr> errors(total);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::atomic<bool> failed{false};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total || failed.load())
                return;
            try {
                outputs[i] = run_drop(cfg, i);
            } catch (...) {
                errors[i] = std::current_exception();
                failed.store(true);
                return;
            }
            const std::size_t d = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(d, total);
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    CampaignResult result;
    std::size_t resampled = 0;
    for (auto& o : outputs) {
        resampled += o.attempts > 1 ? 1 : 0;
        for (auto& r : o.records)
            result.records.push_back(std::move(r));
    }
    result.summary.methods = summarize(result.records);
    result.summary.runtime.threads = workers;
    result.summary.runtime.drops = total;
    result.summary.runtime.resampled_drops = resampled;
    result.summary.runtime.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace cellfree::harness
