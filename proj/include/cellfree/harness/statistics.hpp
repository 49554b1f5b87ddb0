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
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cellfree/harness/records.hpp"
#include "cellfree/power_ee.hpp"

namespace cellfree::harness {

/// Empirical quantile at level p in [0, 1], linear interpolation between
/// order statistics at rank p (n - 1).
inline double quantile(std::vector<double> samples, double p)
{
    if (samples.empty())
        throw std::invalid_argument("quantile: no samples");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("quantile: level outside [0, 1]");
    std::sort(samples.begin(), samples.end());
    const double rank = p * static_cast<double>(samples.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, samples.size() - 1);
    return samples[lo] + (rank - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
}

/// Value exceeded by 95% of the pooled samples.
inline double likely_95(const std::vector<double>& samples)
{
    if (samples.size() < 2)
        throw std::invalid_argument("likely_95: at least two samples are required");
    return quantile(samples, 0.05);
}

inline constexpr int quantile_grid_points = 101;

/// Quantiles at levels 0, 0.01, ..., 1.
inline std::vector<double> quantile_grid(std::vector<double> samples)
{
    std::sort(samples.begin(), samples.end());
    std::vector<double> out;
    out.reserve(quantile_grid_points);
    const double top = static_cast<double>(samples.size() - 1);
    for (int i = 0; i < quantile_grid_points; ++i) {
        const double rank = top * i / (quantile_grid_points - 1);
        const auto lo = static_cast<std::size_t>(std::floor(rank));
        const std::size_t hi = std::min(lo + 1, samples.size() - 1);
        out.push_back(samples[lo] + (rank - static_cast<double>(lo)) * (samples[hi] - samples[lo]));
    }
    return out;
}

struct MethodSummary {
    std::string method;
    std::size_t samples = 0; // pooled per-UE records
    std::size_t drops = 0;
    // Statistics need at least two samples; unset otherwise.
    std::optional<double> likely95_se;
    std::optional<double> likely95_ee; // bit/J
    std::optional<double> likely95_drop_min_ee;
    double median_se = 0.0;
    double median_ee = 0.0;
    double mean_se = 0.0;
    double mean_ee = 0.0;
    std::optional<double> mean_total_ee; // unset when records lack total EE
    double outage_rate = 0.0;
    std::vector<double> se_quantiles; // at levels 0, 0.01, ..., 1
    std::vector<double> ee_quantiles;
};

struct RuntimeStats {
    double wall_seconds = 0.0;
    int threads = 1;
    std::size_t drops = 0;
    std::size_t resampled_drops = 0; // drops that needed more than one attempt
};

struct AggregateSummary {
    std::vector<MethodSummary> methods;
    RuntimeStats runtime;

    const MethodSummary* find(const std::string& label) const
    {
        for (const auto& m : methods)
            if (m.method == label)
                return &m;
        return nullptr;
    }
};

/// Per-method statistics, methods in order of first appearance.
inline std::vector<MethodSummary> summarize(const std::vector<DropRecord>& records)
{
    std::vector<std::string> order;
    std::map<std::string, std::vector<const DropRecord*>> groups;
    for (const auto& r : records) {
        auto [it, inserted] = groups.try_emplace(r.method);
        if (inserted)
            order.push_back(r.method);
        it->second.push_back(&r);
    }

    std::vector<MethodSummary> out;
    for (const auto& label : order) {
        const auto& rs = groups[label];
        MethodSummary s;
        s.method = label;
        s.samples = rs.size();
        std::vector<double> se, ee;
        std::map<std::uint64_t, double> drop_min, drop_total;
        bool have_total = true;
        std::size_t outages = 0;
        for (const auto* r : rs) {
            se.push_back(r->se_bps_hz);
            ee.push_back(r->ee_bit_j);
            outages += r->outage ? 1 : 0;
            auto [it, inserted] = drop_min.try_emplace(r->drop, r->ee_bit_j);
            if (!inserted)
                it->second = std::min(it->second, r->ee_bit_j);
            if (std::isnan(r->ee_total_bit_j))
                have_total = false;
            else
                drop_total[r->drop] = r->ee_total_bit_j;
        }
        s.drops = drop_min.size();
        auto mean = [](const std::vector<double>& v) {
            double acc = 0.0;
            for (double x : v)
                acc += x;
            return acc / static_cast<double>(v.size());
        };
        s.mean_se = mean(se);
        s.mean_ee = mean(ee);
        s.median_se = quantile(se, 0.5);
        s.median_ee = quantile(ee, 0.5);
        if (se.size() >= 2) {
            s.likely95_se = likely_95(se);
            s.likely95_ee = likely_95(ee);
        }
        if (drop_min.size() >= 2) {
            std::vector<double> mins;
            for (const auto& [d, v] : drop_min)
                mins.push_back(v);
            s.likely95_drop_min_ee = likely_95(mins);
        }
        if (have_total && !drop_total.empty()) {
            double acc = 0.0;
            for (const auto& [d, v] : drop_total)
                acc += v;
            s.mean_total_ee = acc / static_cast<double>(drop_total.size());
        }
        s.outage_rate = static_cast<double>(outages) / static_cast<double>(rs.size());
        s.se_quantiles = quantile_grid(se);
        s.ee_quantiles = quantile_grid(ee);
        out.push_back(std::move(s));
    }
    return out;
}

namespace detail {

inline nlohmann::json optional_gbit(const std::optional<double>& v)
{
    return v ? nlohmann::json(*v / bits_per_gbit) : nlohmann::json(nullptr);
}

inline std::vector<double> to_gbit(std::vector<double> v)
{
    for (double& x : v)
        x /= bits_per_gbit;
    return v;
}

} // namespace detail

/// Summary document. EE figures are in Gbit/J. Runtime statistics are kept
/// out so the document is a deterministic function of the records.
inline nlohmann::json summary_to_json(const std::vector<MethodSummary>& methods)
{
    using nlohmann::json;
    json levels = json::array();
    for (int i = 0; i < quantile_grid_points; ++i)
        levels.push_back(static_cast<double>(i) / (quantile_grid_points - 1));
    json arr = json::array();
    for (const auto& m : methods) {
        arr.push_back({
            {"method", m.method},
            {"samples", m.samples},
            {"drops", m.drops},
            {"likely95_se_bps_hz", m.likely95_se ? json(*m.likely95_se) : json(nullptr)},
            {"likely95_ee_gbit_j", detail::optional_gbit(m.likely95_ee)},
            {"likely95_drop_min_ee_gbit_j", detail::optional_gbit(m.likely95_drop_min_ee)},
            {"median_se_bps_hz", m.median_se},
            {"median_ee_gbit_j", m.median_ee / bits_per_gbit},
            {"mean_se_bps_hz", m.mean_se},
            {"mean_ee_gbit_j", m.mean_ee / bits_per_gbit},
            {"mean_total_ee_gbit_j", detail::optional_gbit(m.mean_total_ee)},
            {"outage_rate", m.outage_rate},
            {"se_quantiles_bps_hz", m.se_quantiles},
            {"ee_quantiles_gbit_j", detail::to_gbit(m.ee_quantiles)},
        });
    }
    return json{{"quantile_levels", levels}, {"methods", arr}};
}

inline nlohmann::json runtime_to_json(const RuntimeStats& r)
{
    return {{"wall_seconds", r.wall_seconds},
            {"threads", r.threads},
            {"drops", r.drops},
            {"resampled_drops", r.resampled_drops}};
}

inline void write_json(const std::string& path, const nlohmann::json& doc)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw RuntimeError("cannot write '" + path + "'");
    out << doc.dump(2) << '\n';
    if (!out)
        throw RuntimeError("error while writing '" + path + "'");
}

} // namespace cellfree::harness
