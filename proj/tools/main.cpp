// sst-dcsim — sequential-operation simulator for an SST-fed 800 VDC
// data-center power chain.  Thin argument layer; all work lives in dcsim::.

#include "dcsim/commands.hpp"
#include "dcsim/errors.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>

namespace {

void add_io_options(CLI::App* sub, dcsim::CommandOptions& opt, const char* profile_help) {
    // no ExistingFile check: a missing config is a config-validation failure (exit 3),
    // not an argument-parsing failure (exit 2)
    sub->add_option("--config", opt.config_path, "config file (key = value); built-in defaults when omitted");
    sub->add_option("--profile", opt.profile_path, profile_help)->required();
    sub->add_option("--out", opt.out_dir, "output directory (created if missing)")->required();
}

void add_whole_days_flag(CLI::App* sub, dcsim::CommandOptions& opt) {
    sub->add_flag("--require-whole-days", opt.require_whole_days,
                  "reject profiles that do not cover an integer number of days");
}

void add_beta_option(CLI::App* sub, dcsim::CommandOptions& opt) {
    sub->add_option("--compress-beta", opt.compress_beta,
                    "per-day spread compression toward the daily mean, 0..1")
        ->check(CLI::Range(0.0, 1.0));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale sequential simulator: MV grid -> SST -> 800 VDC bus -> IT load"};
    app.set_version_flag("--version", "sst-dcsim 1.0.0");
    app.require_subcommand(1);

    dcsim::CommandOptions opt;
    std::optional<unsigned> threads_flag;

    auto* day = app.add_subcommand("run-day", "simulate one day on the SST architecture");
    add_io_options(day, opt, "load profile CSV (timestamp,power_kw)");
    add_beta_option(day, opt);
    add_whole_days_flag(day, opt);
    day->callback([&] { opt.command = "run-day"; });

    auto* month = app.add_subcommand("run-month", "simulate a month (profile must cover whole days)");
    add_io_options(month, opt, "load profile CSV (timestamp,power_kw)");
    add_beta_option(month, opt);
    month->callback([&] { opt.command = "run-month"; });

    auto* cmp = app.add_subcommand("compare", "run SST vs. double-conversion UPS on one profile");
    add_io_options(cmp, opt, "load profile CSV (timestamp,power_kw)");
    add_beta_option(cmp, opt);
    add_whole_days_flag(cmp, opt);
    cmp->callback([&] { opt.command = "compare"; });

    auto* sweep = app.add_subcommand("sweep-cap", "re-run the day per output capacitance value");
    add_io_options(sweep, opt, "load profile CSV (timestamp,power_kw)");
    add_beta_option(sweep, opt);
    add_whole_days_flag(sweep, opt);
    sweep->add_option("--c-list", opt.c_list, "capacitances in uF: a:b:step, v1,v2,..., or one value");
    sweep->add_option("--threads", threads_flag,
                      "worker threads (capped by SST_DCSIM_THREADS)");
    sweep->callback([&] { opt.command = "sweep-cap"; });

    auto* met = app.add_subcommand("metrics", "compute the report block for a recorded series");
    add_io_options(met, opt, "series CSV: time_s,value (one header line allowed)");
    met->add_option("--u-ref", opt.u_ref, "reference level (default: series mean)");
    met->add_flag("--thd", opt.do_thd, "also compute THD (needs --f0)");
    met->add_option("--f0", opt.f0_hz, "fundamental frequency for --thd, Hz")
        ->check(CLI::PositiveNumber);
    met->callback([&] { opt.command = "metrics"; });

    auto* gen = app.add_subcommand("gen-profile", "synthesize a load profile CSV");
    gen->add_option("--config", opt.config_path, "config for rated power / sample spacing");
    gen->add_option("--kind", opt.gen_kind, "ai (fast swings) or idc (slow drift)")
        ->check(CLI::IsMember({"ai", "idc"}));
    gen->add_option("--days", opt.gen_days, "number of days")->check(CLI::PositiveNumber);
    gen->add_option("--seed", opt.gen_seed, "generator seed");
    gen->add_option("--out-file", opt.gen_out, "output CSV path")->required();
    gen->callback([&] { opt.command = "gen-profile"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e); // prints help/error text
        return rc == 0 ? 0 : 2;
    }

    const unsigned cap = dcsim::threads_from_env();
    opt.threads = threads_flag ? std::min(*threads_flag, cap) : cap;

    try {
        dcsim::run_command(opt);
        return 0;
    } catch (const dcsim::usage_error& e) {
        std::fprintf(stderr, "sst-dcsim: usage error: %s\n", e.what());
        return 2;
    } catch (const dcsim::config_error& e) {
        std::fprintf(stderr, "sst-dcsim: config error: %s\n", e.what());
        return 3;
    } catch (const dcsim::data_error& e) {
        std::fprintf(stderr, "sst-dcsim: data error: %s\n", e.what());
        return 4;
    } catch (const dcsim::sim_fault& e) {
        std::fprintf(stderr, "sst-dcsim: simulation fault: %s\n", e.what());
        return 5;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "sst-dcsim: internal error: %s\n", e.what());
        return 5;
    }
}
