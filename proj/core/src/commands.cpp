#include "dcsim/commands.hpp"

#include "dcsim/errors.hpp"
#include "dcsim/synth.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace dcsim {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string hash_hex(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void ensure_out_dir(const std::string& dir) {
    if (dir.empty()) throw usage_error("--out directory is required");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw usage_error("cannot create output directory '" + dir + "'");
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    const fs::path p = fs::path(dir) / name;
    std::ofstream f(p, std::ios::binary); // binary: identical bytes on every platform
    if (!f) throw usage_error("cannot write '" + p.string() + "'");
    return f;
}

void write_json(const std::string& dir, const std::string& name, const ojson& j,
                ReportBundle& bundle) {
    auto f = open_out(dir, name);
    f << j.dump(2) << "\n";
    bundle.files.push_back(name);
}

RunConfig load_cfg(const CommandOptions& opt) {
    return opt.config_path.empty() ? RunConfig::from_defaults()
                                   : RunConfig::from_file(opt.config_path);
}

LoadProfile load_input_profile(const CommandOptions& opt, const RunConfig& cfg) {
    if (opt.profile_path.empty()) throw usage_error("--profile is required");
    LoadProfile p = load_profile_csv_file(opt.profile_path, cfg.num("profile.default_dt_s"));
    if (opt.compress_beta) p = compress_fluctuation(p, *opt.compress_beta);
    return p;
}

void write_resolved_cfg(const RunConfig& cfg, const std::string& dir, ReportBundle& bundle) {
    auto f = open_out(dir, "resolved.cfg");
    f << "# resolved configuration, hash " << hash_hex(cfg.hash()) << "\n";
    cfg.write_resolved(f);
    bundle.files.push_back("resolved.cfg");
}

ojson metric(double v, const std::string& unit) {
    return ojson{{"value", v}, {"unit", unit}};
}

ojson metric_null(const std::string& unit) {
    return ojson{{"value", nullptr}, {"unit", unit}};
}

std::string band_unit(const MetricsParams& mp) {
    return "MW^2 over " + fmt9(mp.band_lo_hz) + "-" + fmt9(mp.band_hi_hz) + " Hz";
}

// The 12-key report block shared by every command.
ojson metrics_report(const SimResult& r, const MetricsParams& mp) {
    ojson m;
    if (r.has_bus_metrics) {
        m["u_avg"] = metric(r.vstats.u_avg, "kV");
        m["u_min"] = metric(r.vstats.u_min, "kV");
        m["u_max"] = metric(r.vstats.u_max, "kV");
        m["sigma_u"] = metric(r.vstats.sigma_u, "kV");
        m["delta_pct"] = metric(r.vstats.delta_pct, "%");
        m["within1_pct"] = metric(r.vstats.within1_pct, "%");
        m["within2_pct"] = metric(r.vstats.within2_pct, "%");
        m["kr_pp"] = metric(r.vstats.kr_pp, "fraction");
        m["kr_rms"] = metric(r.vstats.kr_rms, "fraction");
        m["thd"] = metric(r.thd_mean, "fraction");
        m["band_energy"] = r.has_band_energy ? metric(r.band_energy_mw2, band_unit(mp))
                                             : metric_null(band_unit(mp));
    } else {
        for (const char* k : {"u_avg", "u_min", "u_max", "sigma_u"}) m[k] = metric_null("kV");
        for (const char* k : {"delta_pct", "within1_pct", "within2_pct"}) m[k] = metric_null("%");
        for (const char* k : {"kr_pp", "kr_rms", "thd"}) m[k] = metric_null("fraction");
        m["band_energy"] = metric_null(band_unit(mp));
    }
    m["loss_ratio_input_side"] = metric(r.loss_ratio_input, "fraction");
    return m;
}

ojson profile_block(const LoadProfile& p, const CommandOptions& opt) {
    ojson j;
    j["samples"] = p.size();
    j["dt_s"] = p.dt_s;
    j["days"] = p.covered_s() / 86400.0;
    j["start_epoch_s"] = p.start_epoch_s;
    if (opt.compress_beta) j["compress_beta"] = *opt.compress_beta;
    else j["compress_beta"] = nullptr;
    return j;
}

ojson energy_block(const SimResult& r) {
    return ojson{{"e_load_mwh", r.e_load_mwh},
                 {"e_input_mwh", r.e_input_mwh},
                 {"e_loss_mwh", r.e_loss_mwh}};
}

ojson audit_block(const SimResult& r) {
    return ojson{{"e_grid_j", r.audit.e_grid_j},
                 {"e_load_j", r.audit.e_load_j},
                 {"e_rloss_j", r.audit.e_rloss_j},
                 {"e_stored_j", r.audit.e_stored_j},
                 {"residual_rel", r.audit.residual_rel}};
}

ojson calibration_block(const CalibrationResult& cr, double target) {
    return ojson{{"target_ratio", target},
                 {"achieved_ratio", cr.achieved_ratio},
                 {"scale", cr.scale},
                 {"iterations", cr.iterations}};
}

// Calibrate the scenario's chain against the architecture target on its own
// bus-load series.  Returns the calibration record for the report.
std::optional<CalibrationResult> apply_calibration(const RunConfig& cfg, ScenarioConfig& scen) {
    if (!cfg.calibrate_losses()) return std::nullopt;
    const BusSeries bs = bus_series(scen);
    CalibrationResult cr =
        calibrate_chain(scen.chain, cfg.loss_target(scen.architecture), bs.p_load_mw);
    scen.chain = cr.chain;
    return cr;
}

void write_per_sample_csv(const std::string& dir, const LoadProfile& prof, const SimResult& r,
                          bool with_bus, ReportBundle& bundle) {
    auto f = open_out(dir, "per_sample.csv");
    f << (with_bus ? "timestamp,p_it_kw,p_load_mw,p_input_mw,p_loss_mw,phi_rad,v_dc_mean_kv\n"
                   : "timestamp,p_it_kw,p_load_mw,p_input_mw,p_loss_mw\n");
    char buf[256];
    for (const SampleRecord& s : r.samples) {
        const double ts = double(prof.start_epoch_s) + s.t_s;
        if (with_bus)
            std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", ts, s.p_it_kw,
                          s.p_load_mw, s.p_input_mw, s.p_loss_mw, s.phi_rad, s.v_dc_mean_kv);
        else
            std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g\n", ts, s.p_it_kw,
                          s.p_load_mw, s.p_input_mw, s.p_loss_mw);
        f << buf;
    }
    bundle.files.push_back("per_sample.csv");
}

void write_voltage_series_csv(const std::string& dir, const SimResult& r, long max_rows,
                              ReportBundle& bundle) {
    auto f = open_out(dir, "voltage_series.csv");
    // stitched time: retained spans of consecutive windows laid end to end
    f << "t_stitched_s,v_bus_kv\n";
    const std::size_t n = r.plot_v_kv.size();
    const std::size_t stride =
        max_rows > 0 ? std::max<std::size_t>(1, (n + std::size_t(max_rows) - 1) / std::size_t(max_rows))
                     : 1;
    char buf[96];
    for (std::size_t i = 0; i < n; i += stride) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", double(i) * r.plot_dt_s, r.plot_v_kv[i]);
        f << buf;
    }
    bundle.files.push_back("voltage_series.csv");
}

void write_loss_series_csv(const std::string& dir, const LoadProfile& prof, const SimResult& r,
                           ReportBundle& bundle) {
    auto f = open_out(dir, "loss_series.csv");
    f << "timestamp,p_loss_mw,loss_frac\n";
    char buf[128];
    for (const SampleRecord& s : r.samples) {
        const double frac = s.p_input_mw > 0.0 ? s.p_loss_mw / s.p_input_mw : 0.0;
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", double(prof.start_epoch_s) + s.t_s,
                      s.p_loss_mw, frac);
        f << buf;
    }
    bundle.files.push_back("loss_series.csv");
}

void write_per_day_energy_csv(const std::string& dir, const LoadProfile& prof, const SimResult& r,
                              ReportBundle& bundle) {
    const std::size_t spd = samples_per_day(prof);
    if (spd == 0) return;
    auto f = open_out(dir, "per_day_energy.csv");
    f << "day,e_load_mwh,e_input_mwh,e_loss_mwh,v_mean_kv\n";
    const double hrs = prof.dt_s / 3600.0;
    const std::size_t days = prof.size() / spd;
    char buf[160];
    for (std::size_t d = 0; d < days; ++d) {
        double el = 0.0, ei = 0.0, ex = 0.0;
        for (std::size_t i = d * spd; i < (d + 1) * spd; ++i) {
            el += r.samples[i].p_load_mw * hrs;
            ei += r.samples[i].p_input_mw * hrs;
            ex += r.samples[i].p_loss_mw * hrs;
        }
        const double vm = d < r.day_v_mean_kv.size() ? r.day_v_mean_kv[d] : 0.0;
        std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.9g\n", d + 1, el, ei, ex, vm);
        f << buf;
    }
    bundle.files.push_back("per_day_energy.csv");
}

void write_histogram_csv(const std::string& dir, const SimResult& r, std::size_t bins,
                         ReportBundle& bundle) {
    if (r.pooled_p_grid_mw.empty() || bins == 0) return;
    const Histogram h = histogram(r.pooled_p_grid_mw, bins);
    auto f = open_out(dir, "histogram.csv");
    f << "bin_lo_mw,bin_hi_mw,count\n";
    char buf[120];
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%zu\n", h.edges[b], h.edges[b + 1], h.counts[b]);
        f << buf;
    }
    bundle.files.push_back("histogram.csv");
}

void write_spectrum_csv(const std::string& dir, const std::string& name,
                        const std::vector<double>& series, double dt_s, ReportBundle& bundle) {
    if (series.size() < 8) return;
    const SpectrumReport sp = spectrum(series, dt_s);
    auto f = open_out(dir, name);
    f << "freq_hz,amplitude_mw\n";
    char buf[96];
    for (std::size_t i = 0; i < sp.freq_hz.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", sp.freq_hz[i], sp.amplitude[i]);
        f << buf;
    }
    bundle.files.push_back(name);
}

ReportBundle run_scenario_cmd(const CommandOptions& opt, bool month) {
    const RunConfig cfg = load_cfg(opt);
    ensure_out_dir(opt.out_dir);
    LoadProfile prof = load_input_profile(opt, cfg);
    if ((month || opt.require_whole_days) && samples_per_day(prof) == 0)
        throw data_error(std::string(month ? "run-month" : "run-day") +
                         ": profile does not divide into whole days");

    ScenarioConfig scen = cfg.scenario(ChainKind::SST, std::move(prof));
    const auto calib = apply_calibration(cfg, scen);
    const SimResult res = run_sequential(scen);

    ReportBundle bundle;
    bundle.out_dir = opt.out_dir;
    bundle.config_hash = cfg.hash();

    ojson j;
    j["tool"] = "sst-dcsim";
    j["version"] = kToolVersion;
    j["command"] = month ? "run-month" : "run-day";
    j["config_hash"] = hash_hex(cfg.hash());
    j["architecture"] = "sst";
    j["profile"] = profile_block(scen.profile, opt);
    j["metrics"] = metrics_report(res, scen.metrics);
    j["energy"] = energy_block(res);
    j["audit"] = audit_block(res);
    j["ess"] = ojson{{"soc_final", res.ess_soc_final}};
    if (month) {
        ojson pd = ojson::array();
        for (const double v : res.day_v_mean_kv) pd.push_back(v);
        j["per_day"] = ojson{{"v_mean_kv", pd}};
    }
    j["faults"] = res.fault_log;
    write_json(opt.out_dir, "metrics.json", j, bundle);

    write_per_sample_csv(opt.out_dir, scen.profile, res, true, bundle);
    write_voltage_series_csv(opt.out_dir, res, cfg.integer("metrics.plot_max_rows"), bundle);
    write_loss_series_csv(opt.out_dir, scen.profile, res, bundle);
    if (month) {
        write_per_day_energy_csv(opt.out_dir, scen.profile, res, bundle);
        write_histogram_csv(opt.out_dir, res, std::size_t(cfg.integer("metrics.histogram_bins")),
                            bundle);
    }
    if (calib) {
        ojson cj;
        cj["sst"] = calibration_block(*calib, cfg.loss_target(ChainKind::SST));
        write_json(opt.out_dir, "calibration.json", cj, bundle);
    }
    write_resolved_cfg(cfg, opt.out_dir, bundle);

    bundle.headline["kr_pp"] = res.vstats.kr_pp;
    bundle.headline["sigma_u_kv"] = res.vstats.sigma_u;
    bundle.headline["within1_pct"] = res.vstats.within1_pct;
    bundle.headline["within2_pct"] = res.vstats.within2_pct;
    bundle.headline["band_energy_mw2"] = res.band_energy_mw2;
    bundle.headline["loss_ratio_input_side"] = res.loss_ratio_input;
    bundle.headline["audit_residual_rel"] = res.audit.residual_rel;
    bundle.headline["thd"] = res.thd_mean;
    if (!res.day_v_mean_kv.empty()) {
        bundle.headline["day_first_v_mean_kv"] = res.day_v_mean_kv.front();
        bundle.headline["day_last_v_mean_kv"] = res.day_v_mean_kv.back();
    }

    std::printf("%s: %zu samples, u_avg %.4f kV, kr_pp %.5f, within1 %.1f%%, loss %.3f%%\n",
                month ? "run-month" : "run-day", res.samples.size(), res.vstats.u_avg,
                res.vstats.kr_pp, res.vstats.within1_pct, res.loss_ratio_input * 100.0);
    return bundle;
}

} // namespace

ReportBundle cmd_run_day(const CommandOptions& opt) { return run_scenario_cmd(opt, false); }

ReportBundle cmd_run_month(const CommandOptions& opt) { return run_scenario_cmd(opt, true); }

ReportBundle cmd_compare(const CommandOptions& opt) {
    const RunConfig cfg = load_cfg(opt);
    ensure_out_dir(opt.out_dir);
    const LoadProfile prof = load_input_profile(opt, cfg);
    if (opt.require_whole_days && samples_per_day(prof) == 0)
        throw data_error("compare: profile does not divide into whole days");

    ScenarioConfig sst = cfg.scenario(ChainKind::SST, prof);
    ScenarioConfig ups = cfg.scenario(ChainKind::UPS, prof);
    const auto cal_s = apply_calibration(cfg, sst);
    const auto cal_u = apply_calibration(cfg, ups);

    const CompareResult cr = compare_architectures(sst, ups);

    ReportBundle bundle;
    bundle.out_dir = opt.out_dir;
    bundle.config_hash = cfg.hash();

    ojson j;
    j["tool"] = "sst-dcsim";
    j["version"] = kToolVersion;
    j["command"] = "compare";
    j["config_hash"] = hash_hex(cfg.hash());
    j["profile"] = profile_block(prof, opt);
    j["savings_pct"] = cr.savings_pct;
    j["delta_loss_pp"] = cr.delta_loss_pp;
    j["energy"] = ojson{{"sst", energy_block(cr.sst)}, {"ups", energy_block(cr.ups)}};
    if (cal_s && cal_u)
        j["calibration"] =
            ojson{{"sst", calibration_block(*cal_s, cfg.loss_target(ChainKind::SST))},
                  {"ups", calibration_block(*cal_u, cfg.loss_target(ChainKind::UPS))}};
    write_json(opt.out_dir, "compare.json", j, bundle);

    for (const auto& [name, res, scen] :
         {std::tuple<const char*, const SimResult&, const ScenarioConfig&>{"metrics_sst.json",
                                                                           cr.sst, sst},
          std::tuple<const char*, const SimResult&, const ScenarioConfig&>{"metrics_ups.json",
                                                                           cr.ups, ups}}) {
        ojson mj;
        mj["tool"] = "sst-dcsim";
        mj["version"] = kToolVersion;
        mj["command"] = "compare";
        mj["config_hash"] = hash_hex(cfg.hash());
        mj["architecture"] = scen.architecture == ChainKind::SST ? "sst" : "ups";
        mj["profile"] = profile_block(prof, opt);
        mj["metrics"] = metrics_report(res, scen.metrics);
        mj["energy"] = energy_block(res);
        write_json(opt.out_dir, name, mj, bundle);
    }

    {
        auto f = open_out(opt.out_dir, "input_power.csv");
        f << "timestamp,p_load_mw,p_input_sst_mw,p_loss_sst_mw,p_input_ups_mw,p_loss_ups_mw\n";
        char buf[224];
        for (std::size_t i = 0; i < cr.sst.samples.size(); ++i) {
            const SampleRecord& a = cr.sst.samples[i];
            const SampleRecord& b = cr.ups.samples[i];
            std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                          double(prof.start_epoch_s) + a.t_s, a.p_load_mw, a.p_input_mw,
                          a.p_loss_mw, b.p_input_mw, b.p_loss_mw);
            f << buf;
        }
        bundle.files.push_back("input_power.csv");
    }

    {
        auto f = open_out(opt.out_dir, "loss_series.csv");
        f << "timestamp,p_loss_sst_mw,p_loss_ups_mw\n";
        char buf[128];
        for (std::size_t i = 0; i < cr.sst.samples.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n",
                          double(prof.start_epoch_s) + cr.sst.samples[i].t_s,
                          cr.sst.samples[i].p_loss_mw, cr.ups.samples[i].p_loss_mw);
            f << buf;
        }
        bundle.files.push_back("loss_series.csv");
    }

    std::vector<double> pin_sst(cr.sst.samples.size()), pin_ups(cr.ups.samples.size());
    for (std::size_t i = 0; i < pin_sst.size(); ++i) pin_sst[i] = cr.sst.samples[i].p_input_mw;
    for (std::size_t i = 0; i < pin_ups.size(); ++i) pin_ups[i] = cr.ups.samples[i].p_input_mw;
    write_spectrum_csv(opt.out_dir, "input_spectrum_sst.csv", pin_sst, prof.dt_s, bundle);
    write_spectrum_csv(opt.out_dir, "input_spectrum_ups.csv", pin_ups, prof.dt_s, bundle);
    write_resolved_cfg(cfg, opt.out_dir, bundle);

    bundle.headline["savings_pct"] = cr.savings_pct;
    bundle.headline["delta_loss_pp"] = cr.delta_loss_pp;
    bundle.headline["sst_loss_ratio"] = cr.sst.loss_ratio_input;
    bundle.headline["ups_loss_ratio"] = cr.ups.loss_ratio_input;
    bundle.headline["sst_e_input_mwh"] = cr.sst.e_input_mwh;
    bundle.headline["ups_e_input_mwh"] = cr.ups.e_input_mwh;

    std::printf("compare: savings %.3f%%, input-side loss sst %.3f%% / ups %.3f%%\n",
                cr.savings_pct, cr.sst.loss_ratio_input * 100.0, cr.ups.loss_ratio_input * 100.0);
    return bundle;
}

ReportBundle cmd_sweep_cap(const CommandOptions& opt) {
    const RunConfig cfg = load_cfg(opt);
    ensure_out_dir(opt.out_dir);
    LoadProfile prof = load_input_profile(opt, cfg);
    if (opt.require_whole_days && samples_per_day(prof) == 0)
        throw data_error("sweep-cap: profile does not divide into whole days");

    const std::vector<double> c_list =
        parse_c_list(opt.c_list.empty() ? cfg.raw("sweep.c_list") : opt.c_list);

    ScenarioConfig base = cfg.scenario(ChainKind::SST, std::move(prof));
    const auto calib = apply_calibration(cfg, base);
    const SweepResult sr = run_capacitance_sweep(base, c_list, opt.threads);

    ReportBundle bundle;
    bundle.out_dir = opt.out_dir;
    bundle.config_hash = cfg.hash();

    // column name tracks the configured band, e.g. band_energy_0p1_3Hz
    std::string band_col = "band_energy_" + fmt9(base.metrics.band_lo_hz) + "_" +
                           fmt9(base.metrics.band_hi_hz) + "Hz";
    for (auto& ch : band_col)
        if (ch == '.') ch = 'p';

    {
        auto f = open_out(opt.out_dir, "sweep.csv");
        f << "c_uF,kr_pp,avg_loss_ratio," << band_col << "\n";
        char buf[160];
        for (const SweepRow& row : sr.rows) {
            std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g\n", row.c_out_uf, row.kr_pp,
                          row.avg_loss_ratio, row.band_energy_mw2);
            f << buf;
        }
        bundle.files.push_back("sweep.csv");
    }

    ojson j;
    j["tool"] = "sst-dcsim";
    j["version"] = kToolVersion;
    j["command"] = "sweep-cap";
    j["config_hash"] = hash_hex(cfg.hash());
    j["profile"] = profile_block(base.profile, opt);
    ojson rows = ojson::array();
    for (const SweepRow& row : sr.rows)
        rows.push_back(ojson{{"c_uF", row.c_out_uf},
                             {"kr_pp", row.kr_pp},
                             {"avg_loss_ratio", row.avg_loss_ratio},
                             {"band_energy_mw2", row.band_energy_mw2}});
    j["rows"] = rows;
    j["argmin_band_c_uF"] = sr.rows[sr.argmin_band].c_out_uf;
    if (calib)
        j["calibration"] =
            ojson{{"sst", calibration_block(*calib, cfg.loss_target(ChainKind::SST))}};
    write_json(opt.out_dir, "sweep.json", j, bundle);
    write_resolved_cfg(cfg, opt.out_dir, bundle);

    bundle.headline["argmin_c_uf"] = sr.rows[sr.argmin_band].c_out_uf;
    bundle.headline["kr_pp_first"] = sr.rows.front().kr_pp;
    bundle.headline["kr_pp_last"] = sr.rows.back().kr_pp;
    bundle.headline["rows"] = double(sr.rows.size());

    std::printf("sweep-cap: %zu points, band-energy argmin at %.9g uF\n", sr.rows.size(),
                sr.rows[sr.argmin_band].c_out_uf);
    return bundle;
}

namespace {

struct GenericSeries {
    double t0 = 0.0;
    double dt = 0.0; // 0 when spacing is not uniform
    std::vector<double> values;
};

// Two numeric columns, optional single header line, uniform spacing preferred.
GenericSeries load_generic_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open series '" + path + "'");
    GenericSeries s;
    std::vector<double> ts;
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw data_error("series line " + std::to_string(ln) + ": expected 2 columns");
        char* e1 = nullptr;
        char* e2 = nullptr;
        const std::string c1 = line.substr(0, comma), c2 = line.substr(comma + 1);
        const double t = std::strtod(c1.c_str(), &e1);
        const double v = std::strtod(c2.c_str(), &e2);
        const bool ok1 = e1 && e1 != c1.c_str() && *e1 == '\0';
        const bool ok2 = e2 && e2 != c2.c_str() && *e2 == '\0';
        if (!ok1 || !ok2) {
            if (ln == 1 && ts.empty()) continue; // header
            throw data_error("series line " + std::to_string(ln) + ": not numeric");
        }
        if (!std::isfinite(t) || !std::isfinite(v))
            throw data_error("series line " + std::to_string(ln) + ": non-finite value");
        ts.push_back(t);
        s.values.push_back(v);
    }
    if (s.values.size() < 2) throw data_error("series '" + path + "': need at least 2 rows");
    s.t0 = ts.front();
    const double dt = ts[1] - ts[0];
    if (!(dt > 0.0)) throw data_error("series '" + path + "': timestamps must increase");
    bool uniform = true;
    for (std::size_t i = 2; i < ts.size(); ++i)
        if (std::fabs(ts[i] - ts[i - 1] - dt) > 1e-6 * std::max(1.0, dt)) {
            uniform = false;
            break;
        }
    s.dt = uniform ? dt : 0.0;
    return s;
}

} // namespace

ReportBundle cmd_metrics(const CommandOptions& opt) {
    const RunConfig cfg = load_cfg(opt);
    ensure_out_dir(opt.out_dir);
    if (opt.profile_path.empty()) throw usage_error("--profile (series CSV) is required");
    if (opt.do_thd && !opt.f0_hz) throw usage_error("--thd requires --f0 <Hz>");

    const GenericSeries s = load_generic_series(opt.profile_path);
    const MetricsParams mp = cfg.metrics_params();

    double mean = 0.0;
    for (const double v : s.values) mean += v;
    mean /= double(s.values.size());
    const double u_ref = opt.u_ref.value_or(mean);
    if (!(u_ref > 0.0))
        throw data_error("metrics: reference must be > 0 (series mean is " + fmt9(mean) + ")");

    const VoltageStats vs = voltage_stats(s.values, u_ref, mp.tol1_frac, mp.tol2_frac);

    ReportBundle bundle;
    bundle.out_dir = opt.out_dir;
    bundle.config_hash = cfg.hash();

    ojson m;
    m["u_avg"] = metric(vs.u_avg, "series unit");
    m["u_min"] = metric(vs.u_min, "series unit");
    m["u_max"] = metric(vs.u_max, "series unit");
    m["sigma_u"] = metric(vs.sigma_u, "series unit");
    m["delta_pct"] = metric(vs.delta_pct, "%");
    m["within1_pct"] = metric(vs.within1_pct, "%");
    m["within2_pct"] = metric(vs.within2_pct, "%");
    m["kr_pp"] = metric(vs.kr_pp, "fraction");
    m["kr_rms"] = metric(vs.kr_rms, "fraction");

    if (opt.do_thd) {
        if (!(s.dt > 0.0)) throw data_error("metrics: THD needs uniformly spaced samples");
        m["thd"] = metric(thd(s.values, 1.0 / s.dt, *opt.f0_hz, mp.thd_harmonics), "fraction");
    } else {
        m["thd"] = metric_null("fraction");
    }

    const double span = s.dt > 0.0 ? double(s.values.size()) * s.dt : 0.0;
    if (s.dt > 0.0 && s.values.size() >= 8 && mp.band_hi_hz <= 0.5 / s.dt &&
        (mp.band_lo_hz <= 0.0 || span >= 2.0 / mp.band_lo_hz))
        m["band_energy"] =
            metric(band_energy(s.values, s.dt, mp.band_lo_hz, mp.band_hi_hz),
                   "(series unit)^2 over " + fmt9(mp.band_lo_hz) + "-" + fmt9(mp.band_hi_hz) + " Hz");
    else
        m["band_energy"] = metric_null(band_unit(mp));
    m["loss_ratio_input_side"] = metric_null("fraction");

    ojson j;
    j["tool"] = "sst-dcsim";
    j["version"] = kToolVersion;
    j["command"] = "metrics";
    j["config_hash"] = hash_hex(cfg.hash());
    j["series"] = ojson{{"samples", s.values.size()},
                        {"dt_s", s.dt > 0.0 ? ojson(s.dt) : ojson(nullptr)},
                        {"u_ref", u_ref}};
    j["metrics"] = m;
    write_json(opt.out_dir, "metrics.json", j, bundle);

    bundle.headline["kr_pp"] = vs.kr_pp;
    bundle.headline["sigma_u"] = vs.sigma_u;

    std::printf("metrics: %zu samples, u_avg %.6g, sigma %.6g, kr_pp %.6g\n", s.values.size(),
                vs.u_avg, vs.sigma_u, vs.kr_pp);
    return bundle;
}

ReportBundle cmd_gen_profile(const CommandOptions& opt) {
    const RunConfig cfg = load_cfg(opt);
    if (opt.gen_out.empty()) throw usage_error("gen-profile: --out-file is required");
    if (opt.gen_days < 1) throw usage_error("gen-profile: --days must be >= 1");

    SynthParams sp;
    sp.rated_kw = cfg.num("it.rated_kW");
    sp.dt_s = cfg.num("profile.default_dt_s");
    sp.seed = opt.gen_seed;

    LoadProfile p;
    if (opt.gen_kind == "ai") p = synth_ai_profile(opt.gen_days, sp);
    else if (opt.gen_kind == "idc") p = synth_idc_profile(opt.gen_days, sp);
    else throw usage_error("gen-profile: --kind must be 'ai' or 'idc'");

    const fs::path out(opt.gen_out);
    if (out.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(out.parent_path(), ec);
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw usage_error("cannot write '" + opt.gen_out + "'");
    write_profile_csv(f, p);

    ReportBundle bundle;
    bundle.out_dir = out.has_parent_path() ? out.parent_path().string() : std::string(".");
    bundle.files.push_back(out.filename().string());
    bundle.config_hash = cfg.hash();
    bundle.headline["samples"] = double(p.size());

    std::printf("gen-profile: %s, %d day(s), %zu samples -> %s\n", opt.gen_kind.c_str(),
                opt.gen_days, p.size(), opt.gen_out.c_str());
    return bundle;
}

ReportBundle run_command(const CommandOptions& opt) {
    if (opt.command == "run-day") return cmd_run_day(opt);
    if (opt.command == "run-month") return cmd_run_month(opt);
    if (opt.command == "compare") return cmd_compare(opt);
    if (opt.command == "sweep-cap") return cmd_sweep_cap(opt);
    if (opt.command == "metrics") return cmd_metrics(opt);
    if (opt.command == "gen-profile") return cmd_gen_profile(opt);
    throw usage_error("unknown command '" + opt.command + "'");
}

std::vector<double> parse_c_list(const std::string& text) {
    const auto parse_num = [&](const std::string& tok) {
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0' || !std::isfinite(v))
            throw usage_error("--c-list: '" + tok + "' is not a number");
        return v;
    };

    std::string t;
    for (const char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty()) throw usage_error("--c-list: empty list");

    std::vector<double> out;
    if (t.find(':') != std::string::npos) {
        const std::size_t p1 = t.find(':');
        const std::size_t p2 = t.find(':', p1 + 1);
        if (p2 == std::string::npos) throw usage_error("--c-list: expected a:b:step");
        const double a = parse_num(t.substr(0, p1));
        const double b = parse_num(t.substr(p1 + 1, p2 - p1 - 1));
        const double step = parse_num(t.substr(p2 + 1));
        if (!(step > 0.0) || b < a) throw usage_error("--c-list: need a <= b and step > 0");
        for (double v = a; v <= b + 1e-9 * step; v += step) out.push_back(v);
    } else {
        std::size_t pos = 0;
        while (pos <= t.size()) {
            const std::size_t comma = t.find(',', pos);
            const std::string tok =
                comma == std::string::npos ? t.substr(pos) : t.substr(pos, comma - pos);
            if (tok.empty()) throw usage_error("--c-list: empty element");
            out.push_back(parse_num(tok));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    return out;
}

unsigned threads_from_env() {
    const char* env = std::getenv("SST_DCSIM_THREADS");
    if (!env || !*env) {
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : hw;
    }
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) return 1;
    return unsigned(std::min<long>(v, 256));
}

} // namespace dcsim
