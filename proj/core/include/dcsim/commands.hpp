#pragma once

#include "dcsim/config.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dcsim {

struct CommandOptions {
    std::string command; // run-day | run-month | compare | sweep-cap | metrics | gen-profile
    std::string config_path;  // empty -> built-in defaults
    std::string profile_path; // input profile CSV (or series CSV for `metrics`)
    std::string out_dir;
    std::optional<double> compress_beta;
    std::string c_list; // overrides sweep.c_list when non-empty
    bool require_whole_days = false;
    unsigned threads = 1; // resolved from SST_DCSIM_THREADS by the caller

    // `metrics` command
    std::optional<double> u_ref; // default: series mean
    bool do_thd = false;
    std::optional<double> f0_hz;

    // `gen-profile` command
    std::string gen_kind = "ai"; // ai | idc
    int gen_days = 1;
    std::uint64_t gen_seed = 1;
    std::string gen_out; // output CSV path
};

// Written artifacts plus headline numbers for programmatic callers.
struct ReportBundle {
    std::string out_dir;
    std::vector<std::string> files; // names relative to out_dir
    std::uint64_t config_hash = 0;
    std::map<std::string, double> headline;
};

// Dispatch on opt.command.  Errors surface as the typed exceptions from
// errors.hpp; the CLI maps them to exit codes.
ReportBundle run_command(const CommandOptions& opt);

ReportBundle cmd_run_day(const CommandOptions& opt);
ReportBundle cmd_run_month(const CommandOptions& opt);
ReportBundle cmd_compare(const CommandOptions& opt);
ReportBundle cmd_sweep_cap(const CommandOptions& opt);
ReportBundle cmd_metrics(const CommandOptions& opt);
ReportBundle cmd_gen_profile(const CommandOptions& opt);

// "a:b:step" inclusive range, "v1,v2,..." list, or a single value (uF).
std::vector<double> parse_c_list(const std::string& text);

// SST_DCSIM_THREADS, clamped to [1, 256]; unset -> hardware concurrency.
unsigned threads_from_env();

} // namespace dcsim
