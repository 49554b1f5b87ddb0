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
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cellfree/types.hpp"

namespace cellfree::harness {

/// One UE under one method in one drop.
struct DropRecord {
    std::uint64_t drop = 0;
    std::string method; // MethodSpec label
    int ue = 0;
    double q = 0.0;
    double se_bps_hz = 0.0;
    double ee_bit_j = 0.0;
    bool outage = false;
    double outer_var = std::numeric_limits<double>::quiet_NaN();
    // Not persisted; NaN after reading from CSV.
    double ee_total_bit_j = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr const char* records_header = "drop,method,ue,q,se_bps_hz,ee_bit_j,outage,outer_var";

inline std::string format_g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_records(std::ostream& out, const std::vector<DropRecord>& records)
{
    out << records_header << '\n';
    for (const auto& r : records) {
        out << r.drop << ',' << r.method << ',' << r.ue << ',' << format_g17(r.q) << ',' << format_g17(r.se_bps_hz)
            << ',' << format_g17(r.ee_bit_j) << ',' << (r.outage ? 1 : 0) << ',';
        if (!std::isnan(r.outer_var))
            out << format_g17(r.outer_var);
        out << '\n';
    }
}

inline void write_records(const std::string& path, const std::vector<DropRecord>& records)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw RuntimeError("cannot write records file '" + path + "'");
    write_records(out, records);
    if (!out)
        throw RuntimeError("error while writing records file '" + path + "'");
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, const std::string& where)
{
    if (s.empty())
        throw ConfigError(where + ": empty numeric field");
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size())
        throw ConfigError(where + ": cannot parse '" + s + "' as a number");
    return v;
}

} // namespace detail

inline std::vector<DropRecord> read_records(std::istream& in, const std::string& name = "records")
{
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError(name + ": empty file, missing header");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != records_header)
        throw ConfigError(name + ": unexpected header '" + line + "'");

    std::vector<DropRecord> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const std::string where = name + ":" + std::to_string(lineno);
        const auto f = detail::split_csv_line(line);
        if (f.size() != 8)
            throw ConfigError(where + ": expected 8 fields, got " + std::to_string(f.size()));
        DropRecord r;
        const double drop = detail::parse_double(f[0], where);
        const double ue = detail::parse_double(f[2], where);
        if (drop < 0 || drop != std::floor(drop) || ue < 0 || ue != std::floor(ue))
            throw ConfigError(where + ": drop and ue must be non-negative integers");
        r.drop = static_cast<std::uint64_t>(drop);
        r.method = f[1];
        r.ue = static_cast<int>(ue);
        r.q = detail::parse_double(f[3], where);
        r.se_bps_hz = detail::parse_double(f[4], where);
        r.ee_bit_j = detail::parse_double(f[5], where);
        if (f[6] != "0" && f[6] != "1")
            throw ConfigError(where + ": outage must be 0 or 1");
        r.outage = f[6] == "1";
        if (!f[7].empty())
            r.outer_var = detail::parse_double(f[7], where);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<DropRecord> read_records(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open records file '" + path + "'");
    return read_records(in, path);
}

} // namespace cellfree::harness
