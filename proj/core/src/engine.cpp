#include "dcsim/engine.hpp"

#include "dcsim/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

namespace dcsim {

namespace {

struct EState {
    double id, iq, vmv, vlv;
};

struct WindowSinks {
    VoltageAccumulator* vacc = nullptr;
    std::vector<double>* pooled_mw = nullptr;  // per-window mean removed
    std::vector<double>* plot_v_kv = nullptr;  // raw box means, plot cadence
    std::vector<double>* thd_scratch = nullptr;
    WindowCapture* capture = nullptr;
    EnergyAudit* audit = nullptr;
};

// Phase shift realizing a per-module transfer at the given link voltages:
// the positive branch of phi (1 - phi/pi) = y, capped at the pi/2 ceiling.
double phase_for_power(const DabParams& d, double v_in, double v_out, double p_module_w) {
    const double k = v_in * v_out * d.n_tr() / (kTwoPi * d.f_sw_hz * d.l_lk());
    double y = p_module_w / k;
    const double sgn = y < 0.0 ? -1.0 : 1.0;
    y = std::fabs(y);
    if (y >= kPi / 4.0) return sgn * kPi / 2.0;
    return sgn * (kPi / 2.0) * (1.0 - std::sqrt(1.0 - 4.0 * y / kPi));
}

// Total stored electrical energy: AC filter inductors (3 phases, amplitude-
// invariant dq), MV node, LV node.
double stored_energy(const ScenarioConfig& cfg, const CarryState& c) {
    const double ib = cfg.rect.i_base_amp();
    const double i2 = c.rect.id_pu * c.rect.id_pu + c.rect.iq_pu * c.rect.iq_pu;
    return 0.75 * cfg.rect.l_ac * ib * ib * i2 +
           0.5 * c.rect.dclink.c * c.rect.dclink.v * c.rect.dclink.v +
           0.5 * c.lv.c * c.lv.v * c.lv.v;
}

void validate_scenario(const ScenarioConfig& cfg) {
    const auto bad = [](const char* what) { throw config_error(std::string("scenario: ") + what); };
    if (cfg.profile.size() < 1) throw data_error("scenario: empty profile");
    if (!(cfg.profile.dt_s > 0.0)) bad("profile dt must be > 0");
    if (!(cfg.window.electrical_dt_s > 0.0)) bad("electrical_dt must be > 0");
    if (!(cfg.window.window_s >= cfg.window.electrical_dt_s)) bad("window shorter than one step");
    if (!(cfg.window.settle_s >= 0.0 && cfg.window.settle_s < cfg.window.window_s))
        bad("settle span must lie inside the window");
    if (!(cfg.window.ramp_s >= 0.0)) bad("ramp span must be >= 0");
    if (!(cfg.rect.l_ac > 0.0 && cfg.rect.c_dc > 0.0 && cfg.rect.r_ac >= 0.0))
        bad("rectifier filter values must be positive");
    if (!(cfg.rect.v_dc_rated > 0.0 && cfg.rect.s_rated > 0.0)) bad("rectifier ratings must be positive");
    if (!(cfg.dab.c_in > 0.0 && cfg.dab.c_out > 0.0 && cfg.dab.n_parallel >= 1))
        bad("DAB capacitances / module count out of range");
    if (!(cfg.v_lv_ref > 0.0)) bad("bus reference must be positive");
    if (!(cfg.metrics.pooled_rate_hz > 0.0)) bad("pooled rate must be positive");
    if (!(cfg.metrics.band_lo_hz >= 0.0 && cfg.metrics.band_hi_hz > cfg.metrics.band_lo_hz))
        bad("band edges out of order");
    if (!(cfg.ctrl.meas_filter_hz > 0.0)) bad("measurement filter cutoff must be positive");
    if (!(cfg.ctrl.dab_rate_hz > 0.0)) bad("DAB control rate must be positive");
}

WindowSummary step_window(const ScenarioConfig& cfg, double p_target_w,
                          CarryState& carry, const WindowSinks& sinks) {
    const RectifierParams& rp = cfg.rect;
    const DabParams& dp = cfg.dab;
    const double dt = cfg.window.electrical_dt_s;
    const long steps = std::lround(cfg.window.window_s / dt);
    const long settle = std::min(std::lround(cfg.window.settle_s / dt), steps);
    const long ramp = std::min(std::lround(cfg.window.ramp_s / dt), settle);

    // Hoisted per-window constants (the hot loop runs 4e4 times per sample).
    const double wb = rp.omega_base();
    const double l = rp.l_pu(), r = rp.r_pu();
    const double kI = wb / l;
    const double sb = rp.s_rated;
    const double vr = rp.v_dc_rated;
    const double vref = cfg.v_lv_ref;
    // total transfer constant: p = kc v_mv v_lv phi (1 - |phi|/pi), all modules
    const double kc = double(dp.n_parallel) * dp.n_tr() / (kTwoPi * dp.f_sw_hz * dp.l_lk());
    const double c_mv = carry.rect.dclink.c;
    const double c_lv = carry.lv.c;
    const double r_loss_k = sb * r; // W per unit of (id^2 + iq^2)
    const double a_f = std::min(1.0, dt * kTwoPi * cfg.ctrl.meas_filter_hz);
    // DAB DSP cadence: one sampled update per switching half-cycle.  The
    // sense filter is the analog stage ahead of the sampler; residual
    // switching ripple on its output aliases into the sampled loop, which is
    // exactly how detuned interleave ripple reaches the grid in hardware.
    const long ctrl_m = std::max(1L, std::lround(1.0 / (cfg.ctrl.dab_rate_hz * dt)));
    const double dt_ctrl = double(ctrl_m) * dt;

    PLLParams pllp;
    pllp.f_nom_hz = rp.f_grid_hz;
    pllp.v_nom_amp = 1.0;
    pllp.pi = cfg.ctrl.pll_pi;

    const double wdt = wb * dt;
    const double cgd = std::cos(wdt), sgd = std::sin(wdt);

    const double p_from = carry.p_prev_w;
    const long pool_m = std::max(1L, std::lround(1.0 / (cfg.metrics.pooled_rate_hz * dt)));
    double pool_p = 0.0, pool_v = 0.0;
    long pool_n = 0;
    const std::size_t pooled_start = sinks.pooled_mw ? sinks.pooled_mw->size() : 0;

    WindowSummary sum;
    double v_sum = 0.0, pg_sum = 0.0;
    long rec_n = 0;
    double e_grid = 0.0, e_load = 0.0, e_rl = 0.0;
    double phi = carry.dab_phi_hold;
    double pshape = phi * (1.0 - std::fabs(phi) / kPi);

    for (long k = 0; k < steps; ++k) {
        // bus load command, held constant across the step; new operating
        // points are reached by a linear slew inside the discarded settle
        // span (an instantaneous MW step onto tens of uF is not a physical
        // trajectory and would ring the voltage loop)
        double p_load = p_target_w;
        if (k < ramp) p_load = p_from + (p_target_w - p_from) * (double(k + 1) / double(ramp));

        // ---- measurements at t_k ----
        const double cg = carry.cos_g, sg = carry.sin_g;
        const double cp = carry.pll.cos_th, sp = carry.pll.sin_th;
        const ABC gv = dq_to_abc_cs(1.0, 0.0, cg, sg); // stiff grid, 1 pu
        const DQ m = abc_to_dq_cs(gv.a, gv.b, gv.c, cp, sp);
        carry.pll = pll_step_dq(pllp, carry.pll, m.q, dt);

        const double rip = carry.ripple.value(dp, carry.p_x_prev_w, carry.lv.v);
        const double v_meas = carry.lv.v + rip;
        carry.v_meas_filt += a_f * (v_meas - carry.v_meas_filt);

        // ---- control laws (outputs frozen over the step) ----
        const OuterLoopResult ol =
            rectifier_outer_loop(cfg.ctrl.outer_pi, carry.rctl.outer, carry.rect.dclink.v, vr,
                                 cfg.ctrl.i_max_pu, dt);
        carry.rctl.outer = ol.state;
        carry.rctl.id_ref = ol.id_ref;
        carry.rctl.iq_ref = ol.iq_ref;
        const InnerLoopResult il = rectifier_inner_loop(
            cfg.ctrl.inner_pi, cfg.ctrl.inner_pi, carry.rctl.inner_d, carry.rctl.inner_q,
            ol.id_ref, ol.iq_ref, carry.rect.id_pu, carry.rect.iq_pu, m.d, m.q, carry.pll.omega,
            wb, l, cfg.ctrl.u_max_pu, dt);
        carry.rctl.inner_d = il.state_d;
        carry.rctl.inner_q = il.state_q;
        if (carry.dab_tick <= 0) {
            // feedforward from the commanded load current at the measured
            // input voltage; the PI only trims the residual error
            const double phi_ff = phase_for_power(dp, carry.rect.dclink.v, vref,
                                                  p_load / double(dp.n_parallel));
            const DabLoopResult dl = dab_voltage_loop(cfg.ctrl.dab_pi, carry.dab_pi,
                                                      carry.v_meas_filt, vref, dt_ctrl);
            carry.dab_pi = dl.state;
            phi = std::clamp(phi_ff + dl.phi, -kPi / 2.0, kPi / 2.0);
            carry.dab_phi_hold = phi;
            carry.dab_tick = ctrl_m;
            pshape = phi * (1.0 - std::fabs(phi) / kPi);
        }
        --carry.dab_tick;
        if (std::fabs(phi) >= kPi / 2.0 - 1e-12) ++sum.clamp_steps;

        // modulation was commanded in the PLL frame; express it in the grid
        // frame the plant integrates in (cheap: both trig caches are at hand)
        const double ce = cp * cg + sp * sg;
        const double se = sp * cg - cp * sg;
        const double ud = il.ud * ce - il.uq * se;
        const double uq = il.uq * ce + il.ud * se;

        // ---- record at t_k ----
        const double p_grid0 = sb * carry.rect.id_pu; // vgd = 1, vgq = 0
        if (k >= settle) {
            v_sum += v_meas;
            pg_sum += p_grid0;
            ++rec_n;
            if (sinks.vacc) sinks.vacc->add(v_meas * 1e-3);
            if (sinks.thd_scratch)
                sinks.thd_scratch->push_back((carry.rect.dclink.v / vr) * (ud * cg - uq * sg) *
                                             rp.v_base_amp());
            if (sinks.capture) {
                sinks.capture->v_meas_v.push_back(v_meas);
                sinks.capture->p_grid_w.push_back(p_grid0);
                sinks.capture->phi_rad.push_back(phi);
            }
            if (sinks.pooled_mw) {
                pool_p += p_grid0;
                pool_v += v_meas;
                if (++pool_n == pool_m) {
                    // box average: integer carrier cycles per block cancel the
                    // 2 f_sw ripple image before the series is stitched
                    sinks.pooled_mw->push_back(pool_p / double(pool_m) * 1e-6);
                    if (sinks.plot_v_kv)
                        sinks.plot_v_kv->push_back(pool_v / double(pool_m) * 1e-3);
                    pool_p = pool_v = 0.0;
                    pool_n = 0;
                }
            }
        }

        // ---- plant integration over [t_k, t_k + dt] (Heun) ----
        // The bus load enters as a current source p_load/v_ref: rack front
        // ends regulate power only at their own (ms-scale) control bandwidth
        // and are current-stiff below it.  A literal constant-power draw
        // would put an unstabilizable +P/(C v^2) pole (~2e4 1/s at this
        // capacitance) on the LV node.
        const double i_load = p_load / vref;
        const auto deriv = [&](const EState& s, EState& d) {
            const double kv = s.vmv / vr;
            d.id = kI * (1.0 + l * s.iq - r * s.id - ud * kv);
            d.iq = kI * (-l * s.id - r * s.iq - uq * kv);
            const double p_ac = sb * kv * (ud * s.id + uq * s.iq);
            const double p_x = kc * s.vmv * s.vlv * pshape;
            d.vmv = (p_ac - p_x) / (s.vmv * c_mv);
            d.vlv = (p_x - i_load * s.vlv) / (s.vlv * c_lv);
        };

        const EState y0{carry.rect.id_pu, carry.rect.iq_pu, carry.rect.dclink.v, carry.lv.v};
        EState d1, d2;
        deriv(y0, d1);
        const EState ye{y0.id + dt * d1.id, y0.iq + dt * d1.iq, y0.vmv + dt * d1.vmv,
                        y0.vlv + dt * d1.vlv};
        deriv(ye, d2);
        const EState y1{y0.id + 0.5 * dt * (d1.id + d2.id), y0.iq + 0.5 * dt * (d1.iq + d2.iq),
                        y0.vmv + 0.5 * dt * (d1.vmv + d2.vmv),
                        y0.vlv + 0.5 * dt * (d1.vlv + d2.vlv)};

        if (!(std::isfinite(y1.id) && std::isfinite(y1.iq) && std::isfinite(y1.vmv) &&
              std::isfinite(y1.vlv)) ||
            y1.vmv < 0.1 * vr || y1.vlv < 0.1 * dp.v_out_rated) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "electrical fault at window step %ld: v_mv=%.1f V, v_lv=%.1f V, id=%.3f pu",
                          k, y1.vmv, y1.vlv, y1.id);
            throw sim_fault(buf);
        }

        // ---- energy audit (trapezoids of the same terms the plant integrates) ----
        if (sinks.audit) {
            const double p_grid1 = sb * y1.id;
            const double rl0 = r_loss_k * (y0.id * y0.id + y0.iq * y0.iq);
            const double rl1 = r_loss_k * (y1.id * y1.id + y1.iq * y1.iq);
            e_grid += 0.5 * dt * (p_grid0 + p_grid1);
            e_rl += 0.5 * dt * (rl0 + rl1);
            e_load += 0.5 * dt * i_load * (y0.vlv + y1.vlv);
        }

        // ---- commit ----
        carry.rect.id_pu = y1.id;
        carry.rect.iq_pu = y1.iq;
        carry.rect.dclink.v = y1.vmv;
        carry.lv.v = y1.vlv;
        carry.ripple.advance(dp.f_sw_hz, dt);
        carry.p_x_prev_w = kc * y1.vmv * y1.vlv * pshape;

        const double c2 = cg * cgd - sg * sgd;
        const double s2 = sg * cgd + cg * sgd;
        const double nrm = 0.5 * (3.0 - (c2 * c2 + s2 * s2));
        carry.cos_g = c2 * nrm;
        carry.sin_g = s2 * nrm;
        carry.t_elec_s += dt;
    }

    // Remove each window's own mean from the pooled grid power: the window-
    // to-window staircase is an artifact of simulating 2 s of electrical time
    // per profile sample, not in-band grid dynamics.  Plot and voltage series
    // keep their absolute levels.
    if (sinks.pooled_mw) {
        auto& v = *sinks.pooled_mw;
        if (v.size() > pooled_start) {
            double mean = 0.0;
            for (std::size_t i = pooled_start; i < v.size(); ++i) mean += v[i];
            mean /= double(v.size() - pooled_start);
            for (std::size_t i = pooled_start; i < v.size(); ++i) v[i] -= mean;
        }
    }

    if (sinks.audit) {
        sinks.audit->e_grid_j += e_grid;
        sinks.audit->e_load_j += e_load;
        sinks.audit->e_rloss_j += e_rl;
    }

    carry.p_prev_w = p_target_w;
    sum.v_mean_v = rec_n ? v_sum / double(rec_n) : 0.0;
    sum.p_grid_mean_w = rec_n ? pg_sum / double(rec_n) : 0.0;
    sum.phi_end = phi;
    return sum;
}

} // namespace

double bus_load_kw(const ScenarioConfig& cfg, double p_profile_kw, double& q_cool_kw) {
    const double p_it = it_load(cfg.it, utilization_from_power(cfg.it, p_profile_kw));
    q_cool_kw = cooling_step(cfg.cooling, q_cool_kw, p_it, cfg.profile.dt_s);
    return p_it + q_cool_kw / cfg.cooling.cop;
}

BusSeries bus_series(const ScenarioConfig& cfg) {
    const LoadProfile& prof = cfg.profile;
    if (prof.size() < 1) throw data_error("bus_series: empty profile");
    BusSeries s;
    const std::size_t n = prof.size();
    s.p_it_kw.resize(n);
    s.p_load_mw.resize(n);
    double q = cfg.cooling.k1 * it_load(cfg.it, utilization_from_power(cfg.it, prof.samples_kw[0]));
    for (std::size_t i = 0; i < n; ++i) {
        s.p_it_kw[i] = it_load(cfg.it, utilization_from_power(cfg.it, prof.samples_kw[i]));
        q = cooling_step(cfg.cooling, q, s.p_it_kw[i], prof.dt_s);
        s.p_load_mw[i] = (s.p_it_kw[i] + q / cfg.cooling.cop) * 1e-3;
    }
    return s;
}

CarryState init_carry(const ScenarioConfig& cfg, double p_load_w) {
    const RectifierParams& rp = cfg.rect;
    CarryState c;

    // Grid current satisfying id (1 - r id) = p / s_b (feedforward equilibrium).
    const double x = p_load_w / rp.s_rated;
    const double r = rp.r_pu();
    double id0 = x;
    for (int i = 0; i < 3; ++i) id0 = x / (1.0 - r * id0);

    c.pll = PLLState{};
    c.rctl.outer = PIState{id0};
    c.rctl.inner_d = PIState{r * id0}; // yields ud = 1 - r id0 at zero error
    c.rctl.inner_q = PIState{0.0};
    c.rctl.id_ref = id0;
    c.rctl.iq_ref = 0.0;
    c.rect.id_pu = id0;
    c.rect.iq_pu = 0.0;
    // The bridge output capacitor and the DAB input bank hang on the same MV
    // node; the integrator sees one merged capacitance.
    c.rect.dclink = {rp.v_dc_rated, rp.c_dc + cfg.dab.c_in};
    c.lv = {cfg.v_lv_ref, double(cfg.dab.n_parallel) * cfg.dab.c_out};
    c.dab_pi = PIState{0.0}; // feedforward carries the operating point
    c.dab_phi_hold = phase_for_power(cfg.dab, rp.v_dc_rated, cfg.v_lv_ref,
                                     p_load_w / double(cfg.dab.n_parallel));
    c.dab_tick = 0;
    c.v_meas_filt = cfg.v_lv_ref;
    c.ripple.gain = cfg.ripple_gain;
    c.ripple.detune = cfg.ripple_detune;
    c.cos_g = 1.0;
    c.sin_g = 0.0;
    c.p_prev_w = p_load_w;
    c.p_x_prev_w = p_load_w;
    c.t_elec_s = 0.0;
    c.initialized = true;
    return c;
}

WindowSummary run_electrical_window(const ScenarioConfig& cfg, double p_load_w,
                                    CarryState& carry, WindowCapture* capture) {
    if (!carry.initialized) carry = init_carry(cfg, p_load_w);
    WindowSinks sinks;
    sinks.capture = capture;
    return step_window(cfg, p_load_w, carry, sinks);
}

SimResult run_sequential(const ScenarioConfig& cfg) {
    validate_scenario(cfg);
    validate_chain(cfg.chain);
    if (cfg.chain.kind != cfg.architecture)
        throw config_error("run_sequential: loss chain does not match the scenario architecture");

    const LoadProfile& prof = cfg.profile;
    const bool elec = cfg.architecture == ChainKind::SST;
    const double dt = prof.dt_s;
    const std::size_t n = prof.size();

    SimResult res;
    res.profile_dt_s = dt;
    res.samples.reserve(n);

    // IT and bus-load series up front (cooling thermal lag threads through)
    BusSeries bus = bus_series(cfg);
    const std::vector<double>& p_it_kw = bus.p_it_kw;
    const std::vector<double>& p_load_mw = bus.p_load_mw;

    if (elec) {
        // The pi/2 transfer ceiling at the regulated operating point must
        // clear the peak bus demand, or the voltage loop rails.
        const double kc = double(cfg.dab.n_parallel) * cfg.dab.n_tr() /
                          (kTwoPi * cfg.dab.f_sw_hz * cfg.dab.l_lk());
        const double p_ceil = kc * cfg.rect.v_dc_rated * cfg.v_lv_ref * (kPi / 4.0);
        const double p_peak = *std::max_element(p_load_mw.begin(), p_load_mw.end()) * 1e6;
        if (p_peak >= p_ceil) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "peak bus load %.3f MW exceeds the DAB transfer ceiling %.3f MW",
                          p_peak * 1e-6, p_ceil * 1e-6);
            throw config_error(buf);
        }
    }

    const double hrs = dt / 3600.0;
    double soc = cfg.ess_soc0;
    CarryState carry;
    double e_stored0 = 0.0;

    VoltageAccumulator vacc(cfg.v_lv_ref * 1e-3, cfg.metrics.tol1_frac, cfg.metrics.tol2_frac);
    std::vector<double> thd_scratch;
    double thd_sum = 0.0;
    std::size_t thd_cnt = 0;
    const std::size_t thd_sel = std::min<std::size_t>(cfg.metrics.thd_max_windows, n);
    const std::size_t thd_stride = thd_sel ? std::max<std::size_t>(1, n / thd_sel) : 0;

    const std::size_t spd = samples_per_day(prof);
    std::vector<double> day_sum, day_cnt;

    WindowSinks sinks;
    sinks.vacc = &vacc;
    sinks.pooled_mw = &res.pooled_p_grid_mw;
    sinks.plot_v_kv = &res.plot_v_kv;
    sinks.audit = &res.audit;

    for (std::size_t i = 0; i < n; ++i) {
        const double pl_mw = p_load_mw[i];
        const ChainPowerResult cpr = chain_input_power(cfg.chain, pl_mw);
        res.e_load_mwh += pl_mw * hrs;
        res.e_input_mwh += cpr.p_input_mw * hrs;
        res.e_loss_mwh += cpr.p_loss_mw * hrs;
        soc = ess_soc_step(cfg.ess, soc, 0.0, 0.0, dt).soc;

        SampleRecord rec;
        rec.t_s = double(i) * dt;
        rec.p_it_kw = p_it_kw[i];
        rec.p_load_mw = pl_mw;
        rec.p_input_mw = cpr.p_input_mw;
        rec.p_loss_mw = cpr.p_loss_mw;

        if (elec) {
            const double p_w = pl_mw * 1e6;
            if (!carry.initialized) {
                carry = init_carry(cfg, p_w);
                e_stored0 = stored_energy(cfg, carry);
            }
            const bool want_thd = thd_sel && (i % thd_stride == 0) && thd_cnt < thd_sel;
            thd_scratch.clear();
            sinks.thd_scratch = want_thd ? &thd_scratch : nullptr;

            WindowSummary ws;
            try {
                ws = step_window(cfg, p_w, carry, sinks);
            } catch (const sim_fault& f) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "sample %zu (t=%.0f s): ", i, rec.t_s);
                throw sim_fault(buf + std::string(f.what()));
            }
            rec.phi_rad = ws.phi_end;
            rec.v_dc_mean_kv = ws.v_mean_v * 1e-3;

            if (want_thd) {
                thd_sum += thd(thd_scratch, 1.0 / cfg.window.electrical_dt_s, cfg.rect.f_grid_hz,
                               cfg.metrics.thd_harmonics);
                ++thd_cnt;
            }
            if (ws.clamp_steps > 0 && res.fault_log.size() < 32) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "sample %zu: phase shift at limit for %zu steps", i,
                              ws.clamp_steps);
                res.fault_log.emplace_back(buf);
            }
            const std::size_t d = spd ? i / spd : 0;
            if (d >= day_sum.size()) {
                day_sum.resize(d + 1, 0.0);
                day_cnt.resize(d + 1, 0.0);
            }
            day_sum[d] += ws.v_mean_v * 1e-3;
            day_cnt[d] += 1.0;
        }

        res.samples.push_back(rec);
    }

    res.loss_ratio_input = res.e_input_mwh > 0.0 ? res.e_loss_mwh / res.e_input_mwh : 0.0;
    res.ess_soc_final = soc;

    if (elec) {
        res.has_bus_metrics = vacc.count() > 0;
        if (res.has_bus_metrics) res.vstats = vacc.finalize();
        res.thd_mean = thd_cnt ? thd_sum / double(thd_cnt) : 0.0;
        res.pooled_dt_s = 1.0 / cfg.metrics.pooled_rate_hz;
        res.plot_dt_s = res.pooled_dt_s;

        const double span_s = double(res.pooled_p_grid_mw.size()) * res.pooled_dt_s;
        const double need_s = cfg.metrics.band_lo_hz > 0.0 ? 2.0 / cfg.metrics.band_lo_hz : 0.0;
        if (!res.pooled_p_grid_mw.empty() && span_s >= need_s) {
            res.band_energy_mw2 = band_energy(res.pooled_p_grid_mw, res.pooled_dt_s,
                                              cfg.metrics.band_lo_hz, cfg.metrics.band_hi_hz);
            res.has_band_energy = true;
        }

        res.audit.e_stored_j = stored_energy(cfg, carry) - e_stored0;
        const double bal = res.audit.e_grid_j - res.audit.e_load_j - res.audit.e_rloss_j -
                           res.audit.e_stored_j;
        res.audit.residual_rel = std::fabs(bal) / std::max(res.audit.e_load_j, 1.0);

        res.day_v_mean_kv.resize(day_sum.size());
        for (std::size_t d = 0; d < day_sum.size(); ++d)
            res.day_v_mean_kv[d] = day_cnt[d] > 0.0 ? day_sum[d] / day_cnt[d] : 0.0;
    }

    return res;
}

CompareResult compare_architectures(const ScenarioConfig& sst_cfg, const ScenarioConfig& ups_cfg) {
    if (sst_cfg.architecture != ChainKind::SST || ups_cfg.architecture != ChainKind::UPS)
        throw config_error("compare_architectures: expects one SST and one UPS scenario");
    CompareResult r;
    r.sst = run_sequential(sst_cfg);
    r.ups = run_sequential(ups_cfg);
    if (r.ups.e_input_mwh > 0.0)
        r.savings_pct = (r.ups.e_input_mwh - r.sst.e_input_mwh) / r.ups.e_input_mwh * 100.0;
    r.delta_loss_pp = (r.ups.loss_ratio_input - r.sst.loss_ratio_input) * 100.0;
    return r;
}

SweepResult run_capacitance_sweep(const ScenarioConfig& base, const std::vector<double>& c_out_uf,
                                  unsigned n_threads) {
    if (c_out_uf.empty()) throw usage_error("sweep: empty capacitance list");
    if (base.architecture != ChainKind::SST)
        throw config_error("sweep: output-capacitance sweep needs the SST architecture");
    for (double c : c_out_uf)
        if (!(c > 0.0)) throw usage_error("sweep: capacitance values must be > 0 uF");

    SweepResult out;
    out.rows.resize(c_out_uf.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    const auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= c_out_uf.size()) return;
            try {
                ScenarioConfig cfg = base;
                cfg.dab.c_out = c_out_uf[i] * 1e-6;
                const SimResult r = run_sequential(cfg);
                out.rows[i] = {c_out_uf[i], r.vstats.kr_pp, r.loss_ratio_input, r.band_energy_mw2};
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };

    const unsigned nt = std::max(1u, std::min<unsigned>(n_threads, unsigned(c_out_uf.size())));
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nt);
        for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);

    for (std::size_t i = 1; i < out.rows.size(); ++i)
        if (out.rows[i].band_energy_mw2 < out.rows[out.argmin_band].band_energy_mw2)
            out.argmin_band = i;
    return out;
}

} // namespace dcsim
