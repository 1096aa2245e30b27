#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace dcsim {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---- PI regulator with conditional anti-windup -----------------------------

struct PIParams {
    double kp = 1.0;
    double ki = 0.0;      // 1/s
    double out_min = -1e30;
    double out_max = 1e30;
};

struct PIState {
    double integ = 0.0; // integral contribution, same unit as the output
};

struct PIResult {
    double out;
    PIState state;
};

// One discrete update:
//   u_raw = kp*e + integ + ki*e*dt,  out = clamp(u_raw).
// The integral is frozen when the output is saturated AND the error pushes
// further into the limit; it is also clamped to the output range so a long
// saturation cannot bank an unbounded reserve.
inline PIResult pi_step(const PIParams& p, PIState s, double error, double dt) {
    const double di = p.ki * error * dt;
    const double u_raw = p.kp * error + s.integ + di;
    double out = u_raw;
    bool freeze = false;
    if (u_raw > p.out_max) {
        out = p.out_max;
        freeze = error > 0.0;
    } else if (u_raw < p.out_min) {
        out = p.out_min;
        freeze = error < 0.0;
    }
    if (!freeze) {
        s.integ += di;
        if (s.integ > p.out_max) s.integ = p.out_max;
        else if (s.integ < p.out_min) s.integ = p.out_min;
    }
    return {out, s};
}

// ---- Park / inverse Park (amplitude-invariant) ------------------------------
//
// d axis aligned with the phase-a cosine:
//   vd = (2/3)[va cos(th) + vb cos(th-2pi/3) + vc cos(th+2pi/3)]
//   vq = -(2/3)[va sin(th) + vb sin(th-2pi/3) + vc sin(th+2pi/3)]
// A balanced cosine set of amplitude V transformed at its own angle gives
// (V, 0); quadrature gives (0, V).  Power: p = (3/2)(vd id + vq iq).

struct DQ {
    double d = 0.0;
    double q = 0.0;
};

// Fast path: caller supplies cos(theta), sin(theta).
inline DQ abc_to_dq_cs(double va, double vb, double vc, double c, double s) {
    // cos(th -/+ 2pi/3) and sin(th -/+ 2pi/3) via angle addition.
    constexpr double h = 0.5;                 // cos(2pi/3) = -1/2
    constexpr double r3 = 0.86602540378443864676; // sin(2pi/3)
    const double cb = -h * c + r3 * s;  // cos(th - 2pi/3)
    const double sb = -h * s - r3 * c;  // sin(th - 2pi/3)
    const double cc = -h * c - r3 * s;  // cos(th + 2pi/3)
    const double sc = -h * s + r3 * c;  // sin(th + 2pi/3)
    DQ o;
    o.d = (2.0 / 3.0) * (va * c + vb * cb + vc * cc);
    o.q = -(2.0 / 3.0) * (va * s + vb * sb + vc * sc);
    return o;
}

inline DQ abc_to_dq(double va, double vb, double vc, double theta) {
    return abc_to_dq_cs(va, vb, vc, std::cos(theta), std::sin(theta));
}

struct ABC {
    double a = 0.0, b = 0.0, c = 0.0;
};

inline ABC dq_to_abc_cs(double vd, double vq, double c, double s) {
    constexpr double h = 0.5;
    constexpr double r3 = 0.86602540378443864676;
    const double cb = -h * c + r3 * s;
    const double sb = -h * s - r3 * c;
    const double cc = -h * c - r3 * s;
    const double sc = -h * s + r3 * c;
    return {vd * c - vq * s, vd * cb - vq * sb, vd * cc - vq * sc};
}

inline ABC dq_to_abc(double vd, double vq, double theta) {
    return dq_to_abc_cs(vd, vq, std::cos(theta), std::sin(theta));
}

// ---- synchronous-reference-frame PLL ----------------------------------------

struct PLLParams {
    double f_nom_hz = 50.0;
    double v_nom_amp = 1.0;   // expected phase-voltage amplitude (normalizes vq)
    PIParams pi{100.0, 2000.0, 0.0, 0.0}; // limits filled from omega band
    double omega_band = 0.2;  // correction limited to +/-20 % of nominal

    PLLParams() {
        pi.out_min = -omega_band * kTwoPi * f_nom_hz;
        pi.out_max = +omega_band * kTwoPi * f_nom_hz;
    }
};

struct PLLState {
    double theta = 0.0;             // tracked angle, [0, 2pi)
    double omega = kTwoPi * 50.0;   // rad/s
    PIState pi{};
    // cached cos/sin(theta); kept consistent by pll_step
    double cos_th = 1.0;
    double sin_th = 0.0;
};

inline double wrap_angle(double th) {
    th = std::fmod(th, kTwoPi);
    if (th < 0.0) th += kTwoPi;
    return th;
}

// Locks the d axis onto the phase-a cosine.  vq > 0 means the tracked angle
// lags the grid, so positive gains speed the oscillator up.  With zero input
// voltage the angle advances at nominal frequency.  The _dq form takes the
// q-axis voltage already projected at the cached angle, for callers that
// need the Park result themselves anyway.
inline PLLState pll_step_dq(const PLLParams& p, PLLState s, double vq, double dt) {
    const double vq_n = vq / p.v_nom_amp;
    const PIResult r = pi_step(p.pi, s.pi, vq_n, dt);
    s.pi = r.state;
    s.omega = kTwoPi * p.f_nom_hz + r.out;

    const double d = s.omega * dt;
    // Small-angle rotation of the cached unit vector (|d| ~ 1e-2 at typical
    // step sizes); one first-order renormalization per step holds |(c,s)| at 1
    // to ~1e-16 without a sqrt.
    const double cd = 1.0 - d * d * (0.5 - d * d / 24.0);
    const double sd = d * (1.0 - d * d / 6.0);
    const double c2 = s.cos_th * cd - s.sin_th * sd;
    const double s2 = s.sin_th * cd + s.cos_th * sd;
    const double norm = 0.5 * (3.0 - (c2 * c2 + s2 * s2));
    s.cos_th = c2 * norm;
    s.sin_th = s2 * norm;
    s.theta = wrap_angle(s.theta + d);
    return s;
}

inline PLLState pll_step(const PLLParams& p, PLLState s, double va, double vb, double vc, double dt) {
    const DQ m = abc_to_dq_cs(va, vb, vc, s.cos_th, s.sin_th);
    return pll_step_dq(p, s, m.q, dt);
}

// Re-derive the trig cache after external edits to theta (tests, re-init).
inline void pll_sync_cache(PLLState& s) {
    s.cos_th = std::cos(s.theta);
    s.sin_th = std::sin(s.theta);
}

// ---- rectifier voltage/current loops ----------------------------------------

struct RectifierControlState {
    PIState outer{};   // DC-link voltage -> d-current reference
    PIState inner_d{}; // current -> modulation
    PIState inner_q{};
    double id_ref = 0.0;
    double iq_ref = 0.0;
};

struct OuterLoopResult {
    double id_ref;
    double iq_ref;
    PIState state;
};

// DC-link voltage regulator.  The error is per-unitized on the reference so
// the gains are dimensionless; output limited to the converter current
// rating (amplitude limit, iq_ref held at 0 for unity power factor).
inline OuterLoopResult rectifier_outer_loop(const PIParams& pi, PIState s,
                                            double vcap_meas, double vcap_ref,
                                            double i_max_pu, double dt) {
    const double err = (vcap_ref - vcap_meas) / vcap_ref;
    PIResult r = pi_step(pi, s, err, dt);
    double id = r.out;
    if (id > i_max_pu) id = i_max_pu;
    else if (id < -i_max_pu) id = -i_max_pu;
    return {id, 0.0, r.state};
}

struct InnerLoopResult {
    double ud;
    double uq;
    PIState state_d;
    PIState state_q;
};

// Decoupled dq current control with grid-voltage feedforward:
//   ud = vgd + (w/w_base) l_pu iq - PI_d(id_ref - id)
//   uq = vgq - (w/w_base) l_pu id - PI_q(iq_ref - iq)
// Substituted into the per-unit L filter this cancels both the feedforward
// and the cross-coupling, leaving each axis a first-order tracking loop.
// Modulation commands are clamped to +/-u_max (headroom above 1 pu).
inline InnerLoopResult rectifier_inner_loop(const PIParams& pi_d, const PIParams& pi_q,
                                            PIState sd, PIState sq,
                                            double id_ref, double iq_ref,
                                            double id, double iq,
                                            double vgd, double vgq,
                                            double omega, double omega_base,
                                            double l_pu, double u_max, double dt) {
    const double wl = (omega / omega_base) * l_pu;
    PIResult rd = pi_step(pi_d, sd, id_ref - id, dt);
    PIResult rq = pi_step(pi_q, sq, iq_ref - iq, dt);
    double ud = vgd + wl * iq - rd.out;
    double uq = vgq - wl * id - rq.out;
    ud = std::clamp(ud, -u_max, u_max);
    uq = std::clamp(uq, -u_max, u_max);
    return {ud, uq, rd.state, rq.state};
}

struct DabLoopResult {
    double phi;
    PIState state;
};

// 800 V bus regulator: phase shift from the output-voltage error, held inside
// the monotone half-wave region [-pi/2, pi/2].
inline DabLoopResult dab_voltage_loop(const PIParams& pi, PIState s,
                                      double vout_meas, double vout_ref, double dt) {
    PIResult r = pi_step(pi, s, vout_ref - vout_meas, dt);
    const double phi = std::clamp(r.out, -kPi / 2.0, kPi / 2.0);
    return {phi, r.state};
}

} // namespace dcsim
