#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dcsim {

// ---- bus-voltage population statistics -----------------------------------

struct VoltageStats {
    double u_avg = 0.0;
    double u_min = 0.0;
    double u_max = 0.0;
    double sigma_u = 0.0;      // population standard deviation
    double delta_pct = 0.0;    // (u_avg - u_ref)/u_ref * 100
    double within1_pct = 0.0;  // share of samples with |u - u_ref| <= tol1
    double within2_pct = 0.0;
    double kr_pp = 0.0;        // (u_max - u_min)/u_avg
    double kr_rms = 0.0;       // sigma_u / u_avg
    std::size_t n = 0;
};

// Streaming accumulator so month-scale pooled series never need storing.
// Sums are centered on u_ref to keep the variance free of cancellation.
class VoltageAccumulator {
public:
    VoltageAccumulator() = default;
    VoltageAccumulator(double u_ref, double tol1_frac, double tol2_frac)
        : ref_(u_ref), tol1_(tol1_frac * u_ref), tol2_(tol2_frac * u_ref) {}

    void add(double u) {
        const double d = u - ref_;
        s1_ += d;
        s2_ += d * d;
        if (u < min_) min_ = u;
        if (u > max_) max_ = u;
        const double a = d < 0.0 ? -d : d;
        if (a <= tol1_) ++n1_;
        if (a <= tol2_) ++n2_;
        ++n_;
    }

    std::size_t count() const { return n_; }
    VoltageStats finalize() const;

private:
    double ref_ = 0.8, tol1_ = 0.008, tol2_ = 0.016;
    double s1_ = 0.0, s2_ = 0.0;
    double min_ = 1e300, max_ = -1e300;
    std::size_t n_ = 0, n1_ = 0, n2_ = 0;
};

// One-shot form over a stored series.  tol fractions are relative to u_ref.
VoltageStats voltage_stats(std::span<const double> u, double u_ref,
                           double tol1_frac = 0.01, double tol2_frac = 0.02);

// ---- harmonic analysis ------------------------------------------------------

// Total harmonic distortion of a sampled waveform:
//   sqrt(sum_{h=2..H} V_h^2) / V_1
// The series is truncated to a whole number of fundamental periods and the
// harmonic amplitudes are taken with a Goertzel recurrence at h*f0, which on
// the truncated span coincides with exact DFT bins.  Throws when the
// fundamental is absent (|V1| ~ 0), when n_harmonics*f0 exceeds Nyquist, or
// when the span holds less than one period.
double thd(std::span<const double> x, double fs_hz, double f0_hz, int n_harmonics = 40);

// Single-sided amplitude of one tone via Goertzel (exposed for tests).
double goertzel_amplitude(std::span<const double> x, std::size_t n, double w_norm);

// ---- band-limited spectral energy ---------------------------------------------

// Energy of the mean-removed, Hann-windowed series inside [f_lo, f_hi]:
//   E = 2/(N*sum(w^2)) * sum_{k in band} |X_k|^2
// normalized so one in-band tone of amplitude A reports ~A^2/2 and the full
// band [0, Nyquist] recovers the series variance (Parseval with the window
// correction).  Preconditions: f_lo < f_hi <= Nyquist, N*dt >= 2/f_lo.
double band_energy(std::span<const double> x, double dt_s, double f_lo_hz, double f_hi_hz);

// Full single-sided spectrum of the mean-removed, Hann-windowed series for
// plot emission.  amplitude[k] is corrected so a tone of amplitude A peaks
// near A.
struct SpectrumReport {
    double df_hz = 0.0;
    std::vector<double> freq_hz;
    std::vector<double> amplitude;
};

SpectrumReport spectrum(std::span<const double> x, double dt_s);

// ---- energy bookkeeping ratios ---------------------------------------------

// (sum p_input - sum p_load) / sum p_input -- the grid-referenced ratio.
double loss_ratio_input_side(std::span<const double> p_input, std::span<const double> p_load);

// Same losses referenced to delivered energy instead.
double loss_ratio_load_side(std::span<const double> p_input, std::span<const double> p_load);

// ---- histogram ---------------------------------------------------------------

struct Histogram {
    std::vector<double> edges;  // n_bins + 1
    std::vector<std::size_t> counts;
};

// Equal-width bins over [min, max].  A degenerate series (min == max) puts
// all mass in the first bin.
Histogram histogram(std::span<const double> x, std::size_t n_bins);

} // namespace dcsim
