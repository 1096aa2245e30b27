#include "dcsim/config.hpp"

#include "dcsim/errors.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace dcsim {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

const std::map<std::string, std::string>& RunConfig::defaults() {
    static const std::map<std::string, std::string> d = {
        {"profile.default_dt_s", "300"},
        {"bus.v_ref_kV", "0.8"},

        {"rect.v_grid_ll_rms_kV", "10.0"},
        {"rect.f_grid_Hz", "50"},
        {"rect.l_ac_mH", "15"},
        {"rect.r_ac_ohm", "0.1"},
        {"rect.c_dc_uF", "2700"},
        {"rect.v_dc_rated_kV", "1.5"},
        {"rect.s_rated_MW", "2.25"},
        {"rect.fb_switching_Hz", "200"},

        {"dab.v_tr1_kV", "1.5"},
        {"dab.v_tr2_kV", "1.5"},
        {"dab.f_sw_Hz", "1000"},
        {"dab.s_tr_MW", "0.75"},
        {"dab.x_lk_pu", "0.376"},
        {"dab.c_in_uF", "2000"},
        {"dab.c_out_uF", "50"},
        {"dab.n_parallel", "3"},
        {"dab.v_in_rated_kV", "1.5"},
        {"dab.v_out_rated_kV", "0.8"},
        {"dab.ripple_gain", "1.8e-3"},
        {"dab.ripple_detune", "3.75e-4"},

        {"control.pll_kp", "100"},
        {"control.pll_ki", "2000"},
        {"control.pll_band_pu", "0.2"},
        {"control.outer_kp", "2.0"},
        {"control.outer_ki", "50"},
        {"control.i_max_pu", "1.2"},
        {"control.inner_kp", "0.5"},
        {"control.inner_ki", "100"},
        {"control.u_max_pu", "1.2"},
        {"control.dab_kp_rad_per_V", "2.0e-5"},
        {"control.dab_ki_rad_per_Vs", "3.0e-3"},
        {"control.dab_rate_Hz", "2000"},
        {"control.meas_filter_Hz", "500"},

        {"engine.electrical_dt_us", "50"},
        {"engine.window_s", "2.0"},
        {"engine.settle_s", "0.5"},
        {"engine.ramp_s", "0.25"},

        {"it.p_base_kW", "900"},
        {"it.alpha_kW", "1100"},
        {"it.rated_kW", "2000"},
        {"cooling.k1", "0.3"},
        {"cooling.tau_s", "600"},
        {"cooling.cop", "3.5"},

        {"loss.calibrate", "true"},
        {"loss.sst_target_ratio", "0.01924"},
        {"loss.ups_target_ratio", "0.09553"},

        {"ess.e_rated_MWh", "2.0"},
        {"ess.eps_charge", "0.95"},
        {"ess.eps_discharge", "0.95"},
        {"ess.soc_min", "0.1"},
        {"ess.soc_max", "0.9"},
        {"ess.soc0", "0.5"},

        {"metrics.tol1_frac", "0.01"},
        {"metrics.tol2_frac", "0.02"},
        {"metrics.band_lo_Hz", "0.1"},
        {"metrics.band_hi_Hz", "3.0"},
        {"metrics.thd_harmonics", "40"},
        {"metrics.thd_max_windows", "128"},
        {"metrics.pooled_rate_Hz", "50"},
        {"metrics.histogram_bins", "20"},
        {"metrics.plot_max_rows", "100000"},

        {"sweep.c_list", "30:60:5"},
    };
    return d;
}

RunConfig RunConfig::from_defaults() {
    RunConfig c;
    c.v_ = defaults();
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    return from_stream(in);
}

RunConfig RunConfig::from_stream(std::istream& in) {
    RunConfig c = from_defaults();
    std::map<std::string, int> seen;
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(ln) + ": expected key = value");
        const std::string key = trim(body.substr(0, eq));
        const std::string val = trim(body.substr(eq + 1));
        if (key.empty() || val.empty())
            throw config_error("config line " + std::to_string(ln) + ": empty key or value");
        if (!defaults().count(key))
            throw config_error("config line " + std::to_string(ln) + ": unknown key '" + key + "'");
        if (seen.count(key))
            throw config_error("config line " + std::to_string(ln) + ": key '" + key +
                               "' already set on line " + std::to_string(seen[key]));
        seen[key] = ln;
        c.v_[key] = val;
    }
    return c;
}

const std::string& RunConfig::raw(const std::string& key) const {
    const auto it = v_.find(key);
    if (it == v_.end()) throw config_error("unknown config key '" + key + "'");
    return it->second;
}

double RunConfig::num(const std::string& key) const {
    const std::string& s = raw(key);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || !std::isfinite(v))
        throw config_error("config key '" + key + "': '" + s + "' is not a finite number");
    return v;
}

long RunConfig::integer(const std::string& key) const {
    const std::string& s = raw(key);
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw config_error("config key '" + key + "': '" + s + "' is not an integer");
    return v;
}

bool RunConfig::flag(const std::string& key) const {
    const std::string& s = raw(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw config_error("config key '" + key + "': '" + s + "' is not a boolean");
}

std::uint64_t RunConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV offset basis
    const auto mix = [&h](const std::string& s) {
        for (const char ch : s) {
            h ^= std::uint64_t(static_cast<unsigned char>(ch));
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [k, v] : v_) { // std::map iterates sorted
        mix(k);
        mix("=");
        mix(v);
        mix("\n");
    }
    return h;
}

void RunConfig::write_resolved(std::ostream& out) const {
    for (const auto& [k, v] : v_) out << k << " = " << v << "\n";
}

RectifierParams RunConfig::rectifier() const {
    RectifierParams p;
    p.v_grid_ll_rms = num("rect.v_grid_ll_rms_kV") * 1e3;
    p.f_grid_hz = num("rect.f_grid_Hz");
    p.l_ac = num("rect.l_ac_mH") * 1e-3;
    p.r_ac = num("rect.r_ac_ohm");
    p.c_dc = num("rect.c_dc_uF") * 1e-6;
    p.v_dc_rated = num("rect.v_dc_rated_kV") * 1e3;
    p.s_rated = num("rect.s_rated_MW") * 1e6;
    p.fb_switching_hz = num("rect.fb_switching_Hz");
    return p;
}

DabParams RunConfig::dab_params() const {
    DabParams p;
    p.v_tr1 = num("dab.v_tr1_kV") * 1e3;
    p.v_tr2 = num("dab.v_tr2_kV") * 1e3;
    p.f_sw_hz = num("dab.f_sw_Hz");
    p.s_tr = num("dab.s_tr_MW") * 1e6;
    p.x_lk_pu = num("dab.x_lk_pu");
    p.c_in = num("dab.c_in_uF") * 1e-6;
    p.c_out = num("dab.c_out_uF") * 1e-6;
    p.n_parallel = int(integer("dab.n_parallel"));
    p.v_in_rated = num("dab.v_in_rated_kV") * 1e3;
    p.v_out_rated = num("dab.v_out_rated_kV") * 1e3;
    return p;
}

ControlGains RunConfig::control() const {
    ControlGains g;
    const double wband = num("control.pll_band_pu") * kTwoPi * num("rect.f_grid_Hz");
    g.pll_pi = PIParams{num("control.pll_kp"), num("control.pll_ki"), -wband, wband};
    g.i_max_pu = num("control.i_max_pu");
    g.outer_pi = PIParams{num("control.outer_kp"), num("control.outer_ki"), -g.i_max_pu, g.i_max_pu};
    g.u_max_pu = num("control.u_max_pu");
    g.inner_pi = PIParams{num("control.inner_kp"), num("control.inner_ki"), -2.0 * g.u_max_pu,
                          2.0 * g.u_max_pu};
    g.dab_pi = PIParams{num("control.dab_kp_rad_per_V"), num("control.dab_ki_rad_per_Vs"),
                        -kPi / 2.0, kPi / 2.0};
    g.dab_rate_hz = num("control.dab_rate_Hz");
    g.meas_filter_hz = num("control.meas_filter_Hz");
    return g;
}

WindowParams RunConfig::window() const {
    WindowParams w;
    w.electrical_dt_s = num("engine.electrical_dt_us") * 1e-6;
    w.window_s = num("engine.window_s");
    w.settle_s = num("engine.settle_s");
    w.ramp_s = num("engine.ramp_s");
    return w;
}

MetricsParams RunConfig::metrics_params() const {
    MetricsParams m;
    m.tol1_frac = num("metrics.tol1_frac");
    m.tol2_frac = num("metrics.tol2_frac");
    m.band_lo_hz = num("metrics.band_lo_Hz");
    m.band_hi_hz = num("metrics.band_hi_Hz");
    m.thd_harmonics = int(integer("metrics.thd_harmonics"));
    const long tw = integer("metrics.thd_max_windows");
    m.thd_max_windows = tw < 0 ? 0 : std::size_t(tw);
    m.pooled_rate_hz = num("metrics.pooled_rate_Hz");
    return m;
}

ITLoadParams RunConfig::it_params() const {
    ITLoadParams p;
    p.p_base_kw = num("it.p_base_kW");
    p.alpha_kw = num("it.alpha_kW");
    p.rated_kw = num("it.rated_kW");
    return p;
}

CoolingParams RunConfig::cooling_params() const {
    CoolingParams c;
    c.k1 = num("cooling.k1");
    c.tau_s = num("cooling.tau_s");
    c.cop = num("cooling.cop");
    return c;
}

EssParams RunConfig::ess_params() const {
    EssParams e;
    e.e_rated_mwh = num("ess.e_rated_MWh");
    e.eps_ch = num("ess.eps_charge");
    e.eps_dis = num("ess.eps_discharge");
    e.soc_min = num("ess.soc_min");
    e.soc_max = num("ess.soc_max");
    return e;
}

bool RunConfig::calibrate_losses() const { return flag("loss.calibrate"); }

double RunConfig::loss_target(ChainKind k) const {
    return k == ChainKind::SST ? num("loss.sst_target_ratio") : num("loss.ups_target_ratio");
}

ScenarioConfig RunConfig::scenario(ChainKind arch, LoadProfile profile) const {
    ScenarioConfig s;
    s.architecture = arch;
    s.profile = std::move(profile);
    s.rect = rectifier();
    s.dab = dab_params();
    s.ctrl = control();
    s.window = window();
    s.metrics = metrics_params();
    s.ripple_gain = num("dab.ripple_gain");
    s.ripple_detune = num("dab.ripple_detune");
    s.v_lv_ref = num("bus.v_ref_kV") * 1e3;
    s.it = it_params();
    s.cooling = cooling_params();
    s.chain = arch == ChainKind::SST ? default_sst_chain(num("rect.s_rated_MW"))
                                     : default_ups_chain(num("rect.s_rated_MW"));
    s.ess = ess_params();
    s.ess_soc0 = num("ess.soc0");
    return s;
}

} // namespace dcsim
