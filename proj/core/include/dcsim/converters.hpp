#pragma once

#include "dcsim/control.hpp"
#include "dcsim/errors.hpp"

#include <array>
#include <cmath>
#include <utility>

namespace dcsim {

// All converter physics in SI units (V, A, W, F, H, s).  Config keys carry
// engineering units (kV, uF, MW) and are converted once at load time.

// ---- grid-side full-bridge rectifier (averaged, dq frame) -------------------

struct RectifierParams {
    double v_grid_ll_rms = 10e3; // line-to-line RMS
    double f_grid_hz = 50.0;
    double l_ac = 0.015;  // H, per-phase filter inductance
    double r_ac = 0.1;    // ohm, per-phase series resistance
    double c_dc = 2700e-6; // F, bridge output capacitance
    double v_dc_rated = 1.5e3;
    double s_rated = 2.25e6;
    double fb_switching_hz = 200.0; // bridge carrier; informative in the averaged model

    double omega_base() const { return kTwoPi * f_grid_hz; }
    // Amplitude-invariant bases: V phase amplitude, I amplitude, S three-phase.
    double v_base_amp() const { return v_grid_ll_rms * std::sqrt(2.0 / 3.0); }
    double i_base_amp() const { return 2.0 * s_rated / (3.0 * v_base_amp()); }
    double z_base() const { return v_base_amp() / i_base_amp(); }
    double l_pu() const { return omega_base() * l_ac / z_base(); }
    double r_pu() const { return r_ac / z_base(); }
};

struct DcLinkState {
    double v = 0.0; // V
    double c = 0.0; // F
};

struct RectifierState {
    double id_pu = 0.0;
    double iq_pu = 0.0;
    DcLinkState dclink{};
};

// ---- dual-active-bridge stage ------------------------------------------------

struct DabParams {
    double v_tr1 = 1.5e3;  // MV-side winding rating
    double v_tr2 = 1.5e3;  // LV-side winding rating
    double f_sw_hz = 1000.0;
    double s_tr = 0.75e6;  // per-module rating
    double x_lk_pu = 0.376; // leakage reactance on the module base
    double c_in = 2000e-6;  // input capacitance (per channel aggregate)
    double c_out = 50e-6;   // output capacitance per module
    int n_parallel = 3;
    double v_in_rated = 1.5e3;
    double v_out_rated = 0.8e3;

    double n_tr() const { return v_tr1 / v_tr2; }
    double l_lk() const; // derived from x_lk_pu; see leakage_from_pu
};

// Leakage inductance that realizes a per-unit reactance on the winding base:
//   Z_base = v_tr1^2 / s_tr,  L = x_pu * Z_base / (2 pi f_sw)
double leakage_from_pu(double x_pu, double v_tr1, double s_tr, double f_sw_hz);

inline double DabParams::l_lk() const { return leakage_from_pu(x_lk_pu, v_tr1, s_tr, f_sw_hz); }

// Average power through one phase-shift-modulated DAB (leading bridge ->
// lagging bridge), valid for |phi| <= pi:
//   P = (v_in * v_out * n_tr) / (2 pi f_sw L) * phi * (1 - |phi|/pi)
// Monotone in phi only on [-pi/2, pi/2]; the voltage loop never commands
// beyond that.  Throws on |phi| > pi.
double dab_power(const DabParams& p, double v_in, double v_out, double phi);

// ---- transformer rating checks ----------------------------------------------

struct TransformerConstraintReport {
    bool power_ok = false;       // |P(rated, phi)| < s_tr
    double power_margin_w = 0.0; // s_tr - |P|
    bool reactance_ok = false;   // x_lk_pu > phi (1 - |phi|/pi)
    double reactance_margin_pu = 0.0;
    bool all_ok() const { return power_ok && reactance_ok; }
};

// Rating convention: both checks evaluate at the winding voltages
// (v_tr1 / v_tr2 with unity per-unit link voltages), not at the operating
// point of the regulated 800 V bus.
TransformerConstraintReport check_transformer_constraints(const DabParams& p, double phi_rated);

// ---- time stepping -----------------------------------------------------------

// One explicit-trapezoidal (Heun) step of the averaged rectifier:
//   (l_pu/w_b) did = vgd + (w/w_b) l_pu iq - r_pu id - ud (v/v_rated)
//   (l_pu/w_b) diq = vgq - (w/w_b) l_pu id - r_pu iq - uq (v/v_rated)
//   c_dc dv      = p_ac / v - i_draw,   p_ac = s_rated (v/v_rated)(ud id + uq iq)
// The grid is stiff and balanced: vgd = 1, vgq = 0 in the grid-aligned frame.
// Faults when the link collapses below 10 % of rated or goes non-finite.
RectifierState rectifier_step(const RectifierState& s, const RectifierParams& p,
                              double ud, double uq, double i_draw_dc, double dt);

// One Heun step of the two-capacitor DAB channel at fixed phi:
//   p = n_parallel * dab_power(in.v, out.v, phi)
//   in:  c dv = -p / v            (drain)
//   out: c dv = +p / v - i_load   (inject minus constant-current load)
// The transfer is lossless by construction: the same p leaves the input link
// and reaches the output link at every evaluation point.
std::pair<DcLinkState, DcLinkState> dab_step(const DcLinkState& in_link,
                                             const DcLinkState& out_link,
                                             const DabParams& p, double phi,
                                             double i_load, double dt);

// ---- output-ripple observation model -----------------------------------------
//
// The averaged channel suppresses switching ripple, so the 800 V bus state is
// smooth.  Measurements on the real bus are not: each module's output
// capacitor carries a sawtooth at twice the switching frequency with
// peak-to-peak amplitude proportional to the transferred current and to
// 1/c_out.  The model superimposes that sawtooth on the *measured* voltage
// only; the integrated state is untouched.  Parallel modules run from
// near-identical but unsynchronized clocks (detune d), so their sawtooths sit
// a fraction of a hertz off the voltage-loop sampling rate.  The sampled loop
// aliases that residue to |2 f_sw d| and servos the real bus against it --
// which is how capacitor sizing couples into the low-frequency input-power
// spectrum on hardware with switching-synchronized controllers.
struct RippleModel {
    double gain = 0.0;        // charge-ripple fraction of the DC current
    double detune = 3.75e-4;  // relative clock offset between modules
    std::array<double, 3> phase{0.0, 2.0943951023931953, 4.1887902047863905};

    void advance(double f_sw_hz, double dt) {
        const double w0 = kTwoPi * 2.0 * f_sw_hz; // ripple fundamental = 2 f_sw
        phase[0] = wrap_angle(phase[0] + w0 * dt);
        phase[1] = wrap_angle(phase[1] + w0 * (1.0 + detune) * dt);
        phase[2] = wrap_angle(phase[2] + w0 * (1.0 - detune) * dt);
    }

    // Zero-mean measured ripple for a given operating point.
    double value(const DabParams& p, double p_xfer, double v_out) const {
        if (gain == 0.0 || v_out <= 0.0) return 0.0;
        const double i_mod = std::fabs(p_xfer) / (double(p.n_parallel) * v_out);
        const double vpp = gain * i_mod / (2.0 * p.f_sw_hz * p.c_out);
        // unit sawtooth in [-1, 1) per module, averaged across modules
        const double s0 = phase[0] * (1.0 / kPi) - 1.0;
        const double s1 = phase[1] * (1.0 / kPi) - 1.0;
        const double s2 = phase[2] * (1.0 / kPi) - 1.0;
        return 0.5 * vpp * (s0 + s1 + s2) / 3.0;
    }
};

} // namespace dcsim
