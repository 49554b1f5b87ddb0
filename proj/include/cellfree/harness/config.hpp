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

// Campaign configuration. Every key is optional; unspecified keys keep the
// baseline scenario (M = 256 single-antenna APs, K = 8, 1 km x 1 km, 500 drops).

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "cellfree/estimation.hpp"
#include "cellfree/geometry_channel.hpp"
#include "cellfree/power_ee.hpp"
#include "cellfree/tpc_methods.hpp"
#include "cellfree/zf_receiver.hpp"

namespace cellfree::harness {

using json = nlohmann::json;

enum class CsiMode { Realized, Statistical };

/// Shortest round-trip decimal form of a double.
inline std::string format_shortest(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct MethodSpec {
    TpcMethod method = TpcMethod::MaxPower;
    std::optional<double> fixed_nu; // max-min EE inner solver at this nu, no outer search

    std::string label() const
    {
        std::string s(to_string(method));
        if (fixed_nu)
            s += "[nu=" + format_shortest(*fixed_nu) + "]";
        return s;
    }
};

struct CampaignConfig {
    SimGeometry geometry;
    PropagationParams propagation;
    PowerModelParams power;
    double noise_dbm = -92.0;
    double s_r = 5.0;                   // SE floor, bit/s/Hz
    int pilot_length = 0;               // 0: one pilot symbol per UE
    std::optional<double> pilot_power_w; // unset: same as pbar_w
    std::vector<TpcMethod> methods{TpcMethod::MaxPower, TpcMethod::MaxMinSE, TpcMethod::MaxTotalEE,
                                   TpcMethod::MaxMinEE};
    std::vector<double> nu_grid;
    int num_drops = 500;
    std::uint64_t master_seed = 1;
    std::optional<int> threads; // unset: CELLFREE_THREADS, then hardware concurrency
    CsiMode csi_mode = CsiMode::Realized;

    double rho() const { return transmit_snr(power.pbar_w, noise_dbm); }

    double pilot_snr() const { return transmit_snr(pilot_power_w.value_or(power.pbar_w), noise_dbm); }

    int tau_p() const { return pilot_length > 0 ? pilot_length : geometry.num_ues; }

    NetworkSize size() const { return {geometry.num_aps, geometry.total_antennas(), geometry.num_ues}; }

    std::vector<MethodSpec> method_specs() const
    {
        std::vector<MethodSpec> out;
        for (auto m : methods)
            out.push_back({m, std::nullopt});
        for (double nu : nu_grid)
            out.push_back({TpcMethod::MaxMinEE, nu});
        return out;
    }

    void validate() const
    {
        geometry.validate();
        propagation.validate();
        power.validate(geometry.num_ues);
        if (num_drops < 1)
            throw ConfigError("num_drops must be at least 1");
        if (geometry.total_antennas() < geometry.num_ues)
            throw ConfigError("total antennas must be at least num_ues for zero-forcing");
        if (tau_p() < geometry.num_ues)
            throw ConfigError("pilot_length: orthogonality impossible with fewer pilots than UEs");
        if (!(s_r >= 0.0))
            throw ConfigError("s_r must be non-negative");
        if (pilot_power_w && !(*pilot_power_w >= 0.0))
            throw ConfigError("pilot_power_w must be non-negative");
        if (methods.empty() && nu_grid.empty())
            throw ConfigError("methods: at least one method or nu_grid value is required");
        for (double nu : nu_grid)
            if (!(nu > 0.0 && nu <= 1.0))
                throw ConfigError("nu_grid values must lie in (0, 1]");
        if (threads && *threads < 1)
            throw ConfigError("threads must be at least 1 or \"auto\"");
    }
};

namespace detail {

template <class T>
T get_as(const json& v, const std::string& key)
{
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "': wrong type (" + std::string(v.type_name()) + ")");
    }
}

inline double get_number(const json& v, const std::string& key)
{
    if (!v.is_number())
        throw ConfigError("config key '" + key + "': expected a number");
    return v.get<double>();
}

inline int get_int(const json& v, const std::string& key)
{
    if (!v.is_number_integer())
        throw ConfigError("config key '" + key + "': expected an integer");
    return v.get<int>();
}

inline std::vector<double> get_number_list(const json& v, const std::string& key)
{
    if (!v.is_array())
        throw ConfigError("config key '" + key + "': expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v)
        out.push_back(get_number(e, key));
    return out;
}

} // namespace detail

/// Apply the keys of a JSON object onto `cfg`. Unknown keys are rejected.
inline void apply_json(CampaignConfig& cfg, const json& doc)
{
    using namespace detail;
    if (!doc.is_object())
        throw ConfigError("configuration must be a JSON object");

    std::optional<int> total_antennas;
    const std::map<std::string, std::function<void(const json&, const std::string&)>> setters{
        {"area_side_m", [&](const json& v, const std::string& k) { cfg.geometry.area_side_m = get_number(v, k); }},
        {"num_aps", [&](const json& v, const std::string& k) { cfg.geometry.num_aps = get_int(v, k); }},
        {"antennas_per_ap", [&](const json& v, const std::string& k) { cfg.geometry.antennas_per_ap = get_int(v, k); }},
        {"total_antennas", [&](const json& v, const std::string& k) { total_antennas = get_int(v, k); }},
        {"num_ues", [&](const json& v, const std::string& k) { cfg.geometry.num_ues = get_int(v, k); }},
        {"carrier_hz", [&](const json& v, const std::string& k) { cfg.geometry.carrier_hz = get_number(v, k); }},
        {"antenna_spacing_wavelengths",
         [&](const json& v, const std::string& k) { cfg.geometry.antenna_spacing = get_number(v, k); }},
        {"bandwidth_hz", [&](const json& v, const std::string& k) { cfg.power.bandwidth_hz = get_number(v, k); }},
        {"noise_dbm", [&](const json& v, const std::string& k) { cfg.noise_dbm = get_number(v, k); }},
        {"g0_db", [&](const json& v, const std::string& k) { cfg.propagation.g0_db = get_number(v, k); }},
        {"pathloss_exponent",
         [&](const json& v, const std::string& k) { cfg.propagation.pathloss_exponent = get_number(v, k); }},
        {"ref_distance_m", [&](const json& v, const std::string& k) { cfg.propagation.ref_distance_m = get_number(v, k); }},
        {"kfactor_intercept_db",
         [&](const json& v, const std::string& k) { cfg.propagation.kfactor_intercept_db = get_number(v, k); }},
        {"kfactor_slope_db_per_m",
         [&](const json& v, const std::string& k) { cfg.propagation.kfactor_slope_db_per_m = get_number(v, k); }},
        {"sigma_phi_deg",
         [&](const json& v, const std::string& k) { cfg.propagation.sigma_phi_rad = get_number(v, k) * pi / 180.0; }},
        {"sigma_w_db", [&](const json& v, const std::string& k) { cfg.propagation.sigma_w_db = get_number(v, k); }},
        {"shadowing_convention",
         [&](const json& v, const std::string& k) {
             const auto s = get_as<std::string>(v, k);
             if (s == "squared")
                 cfg.propagation.shadowing = ShadowingConvention::Squared;
             else if (s == "stddev")
                 cfg.propagation.shadowing = ShadowingConvention::StdDev;
             else
                 throw ConfigError("config key '" + k + "': expected \"squared\" or \"stddev\"");
         }},
        {"pbar_w", [&](const json& v, const std::string& k) { cfg.power.pbar_w = get_number(v, k); }},
        {"p_ue_w", [&](const json& v, const std::string& k) { cfg.power.p_ue_w = get_number(v, k); }},
        {"p_fix_ap_w", [&](const json& v, const std::string& k) { cfg.power.p_fix_ap_w = get_number(v, k); }},
        {"p_bh_ap_w", [&](const json& v, const std::string& k) { cfg.power.p_bh_ap_w = get_number(v, k); }},
        {"p_fix_ant_w", [&](const json& v, const std::string& k) { cfg.power.p_fix_ant_w = get_number(v, k); }},
        {"p_bh_ant_w", [&](const json& v, const std::string& k) { cfg.power.p_bh_ant_w = get_number(v, k); }},
        {"ue_weights",
         [&](const json& v, const std::string& k) {
             const auto w = get_number_list(v, k);
             cfg.power.weights = w.empty() ? Vec() : Eigen::Map<const Vec>(w.data(), static_cast<Eigen::Index>(w.size()));
         }},
        {"pilot_length", [&](const json& v, const std::string& k) { cfg.pilot_length = get_int(v, k); }},
        {"pilot_power_w",
         [&](const json& v, const std::string& k) {
             if (v.is_null())
                 cfg.pilot_power_w.reset();
             else
                 cfg.pilot_power_w = get_number(v, k);
         }},
        {"s_r", [&](const json& v, const std::string& k) { cfg.s_r = get_number(v, k); }},
        {"methods",
         [&](const json& v, const std::string& k) {
             if (!v.is_array())
                 throw ConfigError("config key '" + k + "': expected an array of method names");
             cfg.methods.clear();
             for (const auto& e : v) {
                 const auto name = get_as<std::string>(e, k);
                 const auto m = parse_method(name);
                 if (!m)
                     throw ConfigError("config key '" + k + "': unknown method '" + name + "'");
                 cfg.methods.push_back(*m);
             }
         }},
        {"nu_grid", [&](const json& v, const std::string& k) { cfg.nu_grid = get_number_list(v, k); }},
        {"num_drops", [&](const json& v, const std::string& k) { cfg.num_drops = get_int(v, k); }},
        {"master_seed",
         [&](const json& v, const std::string& k) {
             if (!v.is_number_unsigned())
                 throw ConfigError("config key '" + k + "': expected a non-negative integer");
             cfg.master_seed = v.get<std::uint64_t>();
         }},
        {"threads",
         [&](const json& v, const std::string& k) {
             if (v.is_string() && v.get<std::string>() == "auto")
                 cfg.threads.reset();
             else
                 cfg.threads = get_int(v, k);
         }},
        {"csi_mode",
         [&](const json& v, const std::string& k) {
             const auto s = get_as<std::string>(v, k);
             if (s == "realized")
                 cfg.csi_mode = CsiMode::Realized;
             else if (s == "statistical")
                 cfg.csi_mode = CsiMode::Statistical;
             else
                 throw ConfigError("config key '" + k + "': expected \"realized\" or \"statistical\"");
         }},
    };

    for (const auto& [key, value] : doc.items()) {
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError("unknown configuration key '" + key + "'");
        it->second(value, key);
    }
    if (total_antennas) {
        const int L = cfg.geometry.num_aps;
        if (L < 1 || *total_antennas % L != 0)
            throw ConfigError("config key 'total_antennas': must be a multiple of num_aps");
        cfg.geometry.antennas_per_ap = *total_antennas / L;
    }
}

inline CampaignConfig config_from_json(const json& doc)
{
    CampaignConfig cfg;
    apply_json(cfg, doc);
    cfg.validate();
    return cfg;
}

inline CampaignConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(doc);
}

inline json to_json(const CampaignConfig& c)
{
    json methods = json::array();
    for (auto m : c.methods)
        methods.push_back(std::string(to_string(m)));
    json weights = json::array();
    for (Eigen::Index i = 0; i < c.power.weights.size(); ++i)
        weights.push_back(c.power.weights(i));
    json doc{
        {"area_side_m", c.geometry.area_side_m},
        {"num_aps", c.geometry.num_aps},
        {"antennas_per_ap", c.geometry.antennas_per_ap},
        {"num_ues", c.geometry.num_ues},
        {"carrier_hz", c.geometry.carrier_hz},
        {"antenna_spacing_wavelengths", c.geometry.antenna_spacing},
        {"bandwidth_hz", c.power.bandwidth_hz},
        {"noise_dbm", c.noise_dbm},
        {"g0_db", c.propagation.g0_db},
        {"pathloss_exponent", c.propagation.pathloss_exponent},
        {"ref_distance_m", c.propagation.ref_distance_m},
        {"kfactor_intercept_db", c.propagation.kfactor_intercept_db},
        {"kfactor_slope_db_per_m", c.propagation.kfactor_slope_db_per_m},
        {"sigma_phi_deg", c.propagation.sigma_phi_rad * 180.0 / pi},
        {"sigma_w_db", c.propagation.sigma_w_db},
        {"shadowing_convention", c.propagation.shadowing == ShadowingConvention::Squared ? "squared" : "stddev"},
        {"pbar_w", c.power.pbar_w},
        {"p_ue_w", c.power.p_ue_w},
        {"p_fix_ap_w", c.power.p_fix_ap_w},
        {"p_bh_ap_w", c.power.p_bh_ap_w},
        {"p_fix_ant_w", c.power.p_fix_ant_w},
        {"p_bh_ant_w", c.power.p_bh_ant_w},
        {"ue_weights", weights},
        {"pilot_length", c.pilot_length},
        {"pilot_power_w", c.pilot_power_w ? json(*c.pilot_power_w) : json(nullptr)},
        {"s_r", c.s_r},
        {"methods", methods},
        {"nu_grid", c.nu_grid},
        {"num_drops", c.num_drops},
        {"master_seed", c.master_seed},
        {"threads", c.threads ? json(*c.threads) : json("auto")},
        {"csi_mode", c.csi_mode == CsiMode::Realized ? "realized" : "statistical"},
    };
    return doc;
}

/// Thread count: explicit setting, then CELLFREE_THREADS, then hardware concurrency.
inline int resolve_threads(const std::optional<int>& requested)
{
    if (requested)
        return std::max(1, *requested);
    if (const char* env = std::getenv("CELLFREE_THREADS")) {
        int v = 0;
        const std::string s(env);
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec == std::errc() && res.ptr == s.data() + s.size() && v >= 1)
            return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace cellfree::harness
