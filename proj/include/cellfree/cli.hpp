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

// Command-line front end: run, sweep, summarize.
// Exit status: 0 success, 1 configuration or usage error, 2 runtime failure.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cellfree/harness/campaign.hpp"
#include "cellfree/harness/config.hpp"
#include "cellfree/harness/records.hpp"
#include "cellfree/harness/statistics.hpp"

namespace cellfree {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 1;
inline constexpr int exit_runtime_error = 2;

namespace cli_detail {

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> drops;
    std::optional<int> threads;
};

inline void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config_path, "campaign configuration (JSON); defaults when omitted");
    cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", o.seed, "override master_seed");
    cmd->add_option("--drops", o.drops, "override num_drops");
    cmd->add_option("--threads", o.threads, "worker threads (overrides config and CELLFREE_THREADS)");
}

inline harness::CampaignConfig load(const CommonOptions& o)
{
    harness::CampaignConfig cfg;
    if (!o.config_path.empty())
        cfg = harness::load_config(o.config_path);
    if (o.seed)
        cfg.master_seed = *o.seed;
    if (o.drops)
        cfg.num_drops = *o.drops;
    if (o.threads)
        cfg.threads = *o.threads;
    cfg.validate();
    return cfg;
}

inline std::string cell(const std::optional<double>& v, double scale = 1.0)
{
    if (!v)
        return "-";
    std::ostringstream s;
    s << std::setprecision(4) << *v / scale;
    return s.str();
}

inline void print_table(std::ostream& out, const std::vector<harness::MethodSummary>& methods)
{
    out << std::left << std::setw(22) << "method" << std::right << std::setw(9) << "samples" << std::setw(14)
        << "SE95 [b/s/Hz]" << std::setw(15) << "EE95 [Gbit/J]" << std::setw(14) << "SE50 [b/s/Hz]" << std::setw(15)
        << "EE50 [Gbit/J]" << std::setw(9) << "outage" << '\n';
    for (const auto& m : methods) {
        out << std::left << std::setw(22) << m.method << std::right << std::setw(9) << m.samples << std::setw(14)
            << cell(m.likely95_se) << std::setw(15) << cell(m.likely95_ee, bits_per_gbit) << std::setw(14)
            << cell(m.median_se) << std::setw(15) << cell(m.median_ee, bits_per_gbit) << std::setw(9)
            << cell(m.outage_rate) << '\n';
    }
}

inline std::filesystem::path prepare_dir(const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw RuntimeError("cannot create output directory '" + dir + "': " + ec.message());
    return dir;
}

/// Run one campaign and write records/summary/runtime/config under `dir` with `suffix`.
inline void run_and_write(const harness::CampaignConfig& cfg, const std::filesystem::path& dir,
                          const std::string& suffix, std::ostream& out)
{
    const auto result = harness::run_campaign(cfg, harness::resolve_threads(cfg.threads));
    harness::write_records((dir / ("records" + suffix + ".csv")).string(), result.records);
    harness::write_json((dir / ("summary" + suffix + ".json")).string(), harness::summary_to_json(result.summary.methods));
    harness::write_json((dir / ("runtime" + suffix + ".json")).string(), harness::runtime_to_json(result.summary.runtime));
    harness::write_json((dir / ("config" + suffix + ".json")).string(), harness::to_json(cfg));
    print_table(out, result.summary.methods);
    out << "drops: " << result.summary.runtime.drops << ", threads: " << result.summary.runtime.threads
        << ", wall: " << std::fixed << std::setprecision(2) << result.summary.runtime.wall_seconds << " s\n"
        << std::defaultfloat;
}

} // namespace cli_detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Uplink power control campaigns for cell-free massive MIMO", "cellfree"};
    app.require_subcommand(1);

    cli_detail::CommonOptions run_opt;
    auto* run = app.add_subcommand("run", "run a Monte Carlo campaign");
    cli_detail::add_common(run, run_opt);

    cli_detail::CommonOptions sweep_opt;
    std::string sweep_param;
    std::vector<double> sweep_values;
    auto* sweep = app.add_subcommand("sweep", "repeat a campaign over s_r or fixed nu values");
    cli_detail::add_common(sweep, sweep_opt);
    sweep->add_option("--param", sweep_param, "s_r or nu")->required()->check(CLI::IsMember({"s_r", "nu"}));
    sweep->add_option("--values", sweep_values, "comma-separated values")->required()->delimiter(',');

    std::string records_path;
    std::string summary_out;
    auto* summarize = app.add_subcommand("summarize", "statistics from a records CSV");
    summarize->add_option("--records", records_path, "records CSV")->required();
    summarize->add_option("--out", summary_out, "write summary JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config_error;
    }

    try {
        if (*run) {
            const auto cfg = cli_detail::load(run_opt);
            cli_detail::run_and_write(cfg, cli_detail::prepare_dir(run_opt.out_dir), "", out);
        } else if (*sweep) {
            const auto base = cli_detail::load(sweep_opt);
            const auto dir = cli_detail::prepare_dir(sweep_opt.out_dir);
            for (double v : sweep_values) {
                auto cfg = base;
                if (sweep_param == "s_r") {
                    cfg.s_r = v;
                } else {
                    cfg.methods.clear();
                    cfg.nu_grid = {v};
                }
                cfg.validate();
                out << sweep_param << " = " << harness::format_shortest(v) << '\n';
                cli_detail::run_and_write(cfg, dir, "_" + sweep_param + "_" + harness::format_shortest(v), out);
            }
        } else if (*summarize) {
            const auto records = harness::read_records(records_path);
            if (records.empty())
                throw ConfigError("records file '" + records_path + "' contains no records");
            const auto methods = harness::summarize(records);
            if (!summary_out.empty())
                harness::write_json(summary_out, harness::summary_to_json(methods));
            cli_detail::print_table(out, methods);
        }
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return exit_config_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime_error;
    }
    return exit_ok;
}

} // namespace cellfree
