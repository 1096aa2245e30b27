#include "dcsim/converters.hpp"

#include <cmath>
#include <string>

namespace dcsim {

double leakage_from_pu(double x_pu, double v_tr1, double s_tr, double f_sw_hz) {
    if (!(x_pu > 0.0) || !(v_tr1 > 0.0) || !(s_tr > 0.0) || !(f_sw_hz > 0.0))
        throw config_error("leakage_from_pu: all arguments must be > 0");
    const double z_base = v_tr1 * v_tr1 / s_tr;
    return x_pu * z_base / (kTwoPi * f_sw_hz);
}

double dab_power(const DabParams& p, double v_in, double v_out, double phi) {
    if (std::fabs(phi) > kPi)
        throw sim_fault("dab_power: |phi| > pi (" + std::to_string(phi) + ")");
    const double k = v_in * v_out * p.n_tr() / (kTwoPi * p.f_sw_hz * p.l_lk());
    return k * phi * (1.0 - std::fabs(phi) / kPi);
}

TransformerConstraintReport check_transformer_constraints(const DabParams& p, double phi_rated) {
    TransformerConstraintReport r;
    // Rated (winding) voltages, unity per-unit link levels.
    const double pw = dab_power(p, p.v_tr1, p.v_tr2, phi_rated);
    r.power_margin_w = p.s_tr - std::fabs(pw);
    r.power_ok = std::fabs(pw) < p.s_tr;
    const double demand = std::fabs(phi_rated) * (1.0 - std::fabs(phi_rated) / kPi);
    r.reactance_margin_pu = p.x_lk_pu - demand;
    r.reactance_ok = p.x_lk_pu > demand;
    return r;
}

namespace {

inline void check_link(double v, double v_rated, const char* which) {
    if (!std::isfinite(v) || v < 0.1 * v_rated)
        throw sim_fault(std::string("DC link '") + which + "' collapsed: v = " +
                        std::to_string(v) + " V (rated " + std::to_string(v_rated) + " V)");
}

} // namespace

RectifierState rectifier_step(const RectifierState& s, const RectifierParams& p,
                              double ud, double uq, double i_draw_dc, double dt) {
    const double wb = p.omega_base();
    const double l = p.l_pu();
    const double r = p.r_pu();
    const double kI = wb / l; // 1/s, per-unit inductor pace
    const double vr = p.v_dc_rated;

    // Grid-aligned frame, stiff balanced source, nominal frequency.
    const double vgd = 1.0, vgq = 0.0, w_pu = 1.0;

    auto deriv = [&](double id, double iq, double v, double& did, double& diq, double& dv) {
        const double scale = v / vr;
        did = kI * (vgd + w_pu * l * iq - r * id - ud * scale);
        diq = kI * (vgq - w_pu * l * id - r * iq - uq * scale);
        const double p_ac = p.s_rated * scale * (ud * id + uq * iq);
        dv = (p_ac / v - i_draw_dc) / s.dclink.c;
    };

    double d1i, d1q, d1v;
    deriv(s.id_pu, s.iq_pu, s.dclink.v, d1i, d1q, d1v);
    const double ide = s.id_pu + dt * d1i;
    const double iqe = s.iq_pu + dt * d1q;
    const double ve = s.dclink.v + dt * d1v;
    check_link(ve, vr, "rectifier");
    double d2i, d2q, d2v;
    deriv(ide, iqe, ve, d2i, d2q, d2v);

    RectifierState out = s;
    out.id_pu = s.id_pu + 0.5 * dt * (d1i + d2i);
    out.iq_pu = s.iq_pu + 0.5 * dt * (d1q + d2q);
    out.dclink.v = s.dclink.v + 0.5 * dt * (d1v + d2v);
    check_link(out.dclink.v, vr, "rectifier");
    return out;
}

std::pair<DcLinkState, DcLinkState> dab_step(const DcLinkState& in_link,
                                             const DcLinkState& out_link,
                                             const DabParams& p, double phi,
                                             double i_load, double dt) {
    auto deriv = [&](double vi, double vo, double& dvi, double& dvo) {
        const double px = double(p.n_parallel) * dab_power(p, vi, vo, phi);
        dvi = (-px / vi) / in_link.c;
        dvo = (px / vo - i_load) / out_link.c;
    };

    double d1i, d1o;
    deriv(in_link.v, out_link.v, d1i, d1o);
    const double vie = in_link.v + dt * d1i;
    const double voe = out_link.v + dt * d1o;
    check_link(vie, p.v_in_rated, "dab-in");
    check_link(voe, p.v_out_rated, "dab-out");
    double d2i, d2o;
    deriv(vie, voe, d2i, d2o);

    DcLinkState in2 = in_link, out2 = out_link;
    in2.v = in_link.v + 0.5 * dt * (d1i + d2i);
    out2.v = out_link.v + 0.5 * dt * (d1o + d2o);
    check_link(in2.v, p.v_in_rated, "dab-in");
    check_link(out2.v, p.v_out_rated, "dab-out");
    return {in2, out2};
}

} // namespace dcsim
