#pragma once

// Reference computations the library must agree with, derived from first
// principles rather than from the formulas under test.

#include <cmath>
#include <cstddef>
#include <vector>

namespace ref {

// Average power delivered by the leading bridge of a DAB over one switching
// period, from the actual waveforms: both bridges apply ideal +/-V square
// waves across the leakage inductance, shifted by phi, so the inductor
// current is piecewise linear.  March the current through one period on a
// fine grid (midpoint sampling of the square waves), strip the DC component
// (the transformer carries none in steady state -- any starting current only
// shifts i(t) by a constant, since the driving voltage integrates to zero
// over a period), then average v1 * i.
//
// No phase-shift power formula appears anywhere below.
inline double dab_switching_power_w(double v1, double v2_reflected, double f_sw_hz,
                                    double l_h, double phi, std::size_t n_steps = 20000) {
    const double w = 2.0 * M_PI * f_sw_hz;
    const double dth = 2.0 * M_PI / double(n_steps);
    auto sq = [](double th) {
        th = std::fmod(th, 2.0 * M_PI);
        if (th < 0.0) th += 2.0 * M_PI;
        return th < M_PI ? 1.0 : -1.0;
    };

    std::vector<double> i(n_steps + 1, 0.0);
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double th_mid = (double(k) + 0.5) * dth;
        const double v_l = v1 * sq(th_mid) - v2_reflected * sq(th_mid - phi);
        i[k + 1] = i[k] + dth * v_l / (w * l_h);
    }

    double i_mean = 0.0;
    for (std::size_t k = 0; k < n_steps; ++k) i_mean += 0.5 * (i[k] + i[k + 1]);
    i_mean /= double(n_steps);

    double p = 0.0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double th_mid = (double(k) + 0.5) * dth;
        const double i_mid = 0.5 * (i[k] + i[k + 1]) - i_mean;
        p += v1 * sq(th_mid) * i_mid;
    }
    return p / double(n_steps);
}

// Root of g(phi) = phi * (1 - phi/pi) - y on [0, pi/2] by plain bisection.
// g is strictly increasing there (g' = 1 - 2 phi/pi > 0), so the root is
// unique when y <= pi/4.
inline double phase_root(double y, double tol = 1e-9) {
    double lo = 0.0, hi = M_PI / 2.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double g = mid * (1.0 - mid / M_PI);
        (g < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace ref
