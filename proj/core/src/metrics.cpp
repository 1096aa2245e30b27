#include "dcsim/metrics.hpp"
#include "dcsim/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace dcsim {

namespace {
constexpr double kPi = std::numbers::pi;

// FFTW plan creation is not thread-safe; execution of distinct plans is.
std::mutex g_fftw_mutex;
} // namespace

VoltageStats VoltageAccumulator::finalize() const {
    if (n_ == 0) throw data_error("voltage stats: empty series");
    VoltageStats v;
    v.n = n_;
    const double inv_n = 1.0 / double(n_);
    const double mean_c = s1_ * inv_n; // mean of (u - ref)
    v.u_avg = ref_ + mean_c;
    v.u_min = min_;
    v.u_max = max_;
    const double var = std::max(0.0, s2_ * inv_n - mean_c * mean_c);
    v.sigma_u = std::sqrt(var);
    v.delta_pct = ref_ != 0.0 ? mean_c / ref_ * 100.0 : 0.0;
    v.within1_pct = 100.0 * double(n1_) * inv_n;
    v.within2_pct = 100.0 * double(n2_) * inv_n;
    if (v.u_avg != 0.0) {
        v.kr_pp = (max_ - min_) / v.u_avg;
        v.kr_rms = v.sigma_u / v.u_avg;
    }
    return v;
}

VoltageStats voltage_stats(std::span<const double> u, double u_ref,
                           double tol1_frac, double tol2_frac) {
    if (u.empty()) throw data_error("voltage stats: empty series");
    if (!(u_ref > 0.0)) throw data_error("voltage stats: u_ref must be > 0");
    VoltageAccumulator acc(u_ref, tol1_frac, tol2_frac);
    for (double v : u) acc.add(v);
    return acc.finalize();
}

double goertzel_amplitude(std::span<const double> x, std::size_t n, double w_norm) {
    // Standard Goertzel recurrence; returns the single-sided amplitude
    // 2|X|/n of the tone at normalized angular frequency w_norm (rad/sample).
    const double coeff = 2.0 * std::cos(w_norm);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s0 = x[i] + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    const double re = s1 - s2 * std::cos(w_norm);
    const double im = s2 * std::sin(w_norm);
    return 2.0 * std::sqrt(re * re + im * im) / double(n);
}

double thd(std::span<const double> x, double fs_hz, double f0_hz, int n_harmonics) {
    if (!(fs_hz > 0.0) || !(f0_hz > 0.0)) throw data_error("thd: fs and f0 must be > 0");
    if (n_harmonics < 2) throw data_error("thd: need at least 2 harmonics");
    if (double(n_harmonics) * f0_hz >= fs_hz / 2.0)
        throw data_error("thd: n_harmonics * f0 exceeds Nyquist");

    const double samples_per_period = fs_hz / f0_hz;
    const std::size_t periods = std::size_t(double(x.size()) / samples_per_period);
    if (periods < 1) throw data_error("thd: series shorter than one fundamental period");
    const std::size_t n = std::size_t(std::llround(double(periods) * samples_per_period));
    if (n > x.size()) throw data_error("thd: truncation overran the series");

    double v1 = 0.0, sum_sq = 0.0, rms_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) rms_sq += x[i] * x[i];
    rms_sq /= double(n);

    for (int h = 1; h <= n_harmonics; ++h) {
        const double w = 2.0 * kPi * double(h) * f0_hz / fs_hz;
        const double a = goertzel_amplitude(x, n, w);
        if (h == 1) v1 = a;
        else sum_sq += a * a;
    }
    if (v1 < 1e-12 * std::sqrt(std::max(rms_sq, 1e-300)) || v1 <= 0.0)
        throw data_error("thd: fundamental amplitude is ~0");
    return std::sqrt(sum_sq) / v1;
}

namespace {

struct WindowedFFT {
    std::vector<double> mag_sq; // |X_k|^2 for k = 0..N/2
    double sum_w2 = 0.0;
    std::size_t n = 0;
};

WindowedFFT hann_fft(std::span<const double> x) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= double(n);

    std::vector<double> in(n);
    double sum_w2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * double(i) / double(n));
        in[i] = (x[i] - mean) * w;
        sum_w2 += w * w;
    }

    const std::size_t nb = n / 2 + 1;
    std::vector<fftw_complex> out(nb);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        plan = fftw_plan_dft_r2c_1d(int(n), in.data(), out.data(), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_destroy_plan(plan);
    }

    WindowedFFT r;
    r.n = n;
    r.sum_w2 = sum_w2;
    r.mag_sq.resize(nb);
    for (std::size_t k = 0; k < nb; ++k)
        r.mag_sq[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
    return r;
}

} // namespace

double band_energy(std::span<const double> x, double dt_s, double f_lo_hz, double f_hi_hz) {
    if (x.size() < 8) throw data_error("band_energy: series too short");
    if (!(dt_s > 0.0)) throw data_error("band_energy: dt must be > 0");
    const double nyquist = 0.5 / dt_s;
    if (!(f_lo_hz >= 0.0) || !(f_lo_hz < f_hi_hz) || f_hi_hz > nyquist * (1.0 + 1e-12))
        throw data_error("band_energy: need 0 <= f_lo < f_hi <= Nyquist");
    if (f_lo_hz > 0.0 && double(x.size()) * dt_s < 2.0 / f_lo_hz)
        throw data_error("band_energy: series shorter than two cycles of f_lo");

    const WindowedFFT f = hann_fft(x);
    const double df = 1.0 / (double(f.n) * dt_s);
    const std::size_t k_lo = std::max<std::size_t>(1, std::size_t(std::ceil(f_lo_hz / df - 1e-9)));
    const std::size_t k_hi = std::min(f.mag_sq.size() - 1,
                                      std::size_t(std::floor(f_hi_hz / df + 1e-9)));
    double e = 0.0;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        // single-sided doubling except for the Nyquist bin of an even series
        const bool nyq = (f.n % 2 == 0) && (k == f.n / 2);
        e += (nyq ? 1.0 : 2.0) * f.mag_sq[k];
    }
    return e / (double(f.n) * f.sum_w2);
}

SpectrumReport spectrum(std::span<const double> x, double dt_s) {
    if (x.size() < 8) throw data_error("spectrum: series too short");
    if (!(dt_s > 0.0)) throw data_error("spectrum: dt must be > 0");
    const WindowedFFT f = hann_fft(x);
    SpectrumReport r;
    r.df_hz = 1.0 / (double(f.n) * dt_s);
    const std::size_t nb = f.mag_sq.size();
    r.freq_hz.resize(nb);
    r.amplitude.resize(nb);
    // Hann coherent gain = 1/2, so amplitude correction is 2 * 2/N = 4/N.
    const double corr = 4.0 / double(f.n);
    for (std::size_t k = 0; k < nb; ++k) {
        r.freq_hz[k] = double(k) * r.df_hz;
        r.amplitude[k] = corr * std::sqrt(f.mag_sq[k]);
    }
    return r;
}

namespace {

std::pair<double, double> energy_sums(std::span<const double> p_input,
                                      std::span<const double> p_load) {
    if (p_input.size() != p_load.size() || p_input.empty())
        throw data_error("loss ratio: series must be non-empty and equally sized");
    double in = 0.0, load = 0.0;
    for (std::size_t i = 0; i < p_input.size(); ++i) {
        in += p_input[i];
        load += p_load[i];
    }
    if (!(in > 0.0)) throw data_error("loss ratio undefined: zero input energy");
    return {in, load};
}

} // namespace

double loss_ratio_input_side(std::span<const double> p_input, std::span<const double> p_load) {
    const auto [in, load] = energy_sums(p_input, p_load);
    return (in - load) / in;
}

double loss_ratio_load_side(std::span<const double> p_input, std::span<const double> p_load) {
    const auto [in, load] = energy_sums(p_input, p_load);
    if (!(load > 0.0)) throw data_error("loss ratio undefined: zero load energy");
    return (in - load) / load;
}

Histogram histogram(std::span<const double> x, std::size_t n_bins) {
    if (x.empty()) throw data_error("histogram: empty series");
    if (n_bins == 0) throw data_error("histogram: need at least one bin");
    const auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());
    const double mn = *mn_it, mx = *mx_it;

    Histogram h;
    h.edges.resize(n_bins + 1);
    h.counts.assign(n_bins, 0);
    const double width = (mx - mn) / double(n_bins);
    for (std::size_t i = 0; i <= n_bins; ++i) h.edges[i] = mn + width * double(i);
    h.edges[n_bins] = mx;

    if (width <= 0.0) {
        h.counts[0] = x.size();
        return h;
    }
    for (double v : x) {
        std::size_t k = std::size_t((v - mn) / width);
        if (k >= n_bins) k = n_bins - 1; // v == max
        ++h.counts[k];
    }
    return h;
}

} // namespace dcsim
