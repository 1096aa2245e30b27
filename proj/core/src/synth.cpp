#include "dcsim/synth.hpp"

#include "dcsim/control.hpp" // kTwoPi
#include "dcsim/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dcsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double u01(std::uint64_t seed, std::uint64_t i) {
    return double(splitmix64(seed * 0x2545f4914f6cdd1dULL + i) >> 11) * 0x1.0p-53;
}

// AR(1) burst track plus diurnal base, clamped to [floor, ceil] utilization.
LoadProfile synth(int days, const SynthParams& sp, double ar, double swing) {
    if (days < 1) throw usage_error("synth profile: days must be >= 1");
    if (!(sp.dt_s > 0.0) || !(sp.rated_kw > 0.0))
        throw usage_error("synth profile: dt and rated power must be > 0");

    const std::size_t n = std::size_t(std::llround(86400.0 / sp.dt_s)) * std::size_t(days);
    LoadProfile out;
    out.start_epoch_s = sp.start_epoch_s;
    out.dt_s = sp.dt_s;
    out.samples_kw.resize(n);

    const double sigma = swing * std::sqrt(1.0 - ar * ar);
    double b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = double(i) * sp.dt_s;
        const double base = 0.62 + sp.diurnal_frac * std::sin(kTwoPi * t / 86400.0 - 1.1);
        b = ar * b + sigma * (2.0 * u01(sp.seed, i) - 1.0) * 1.732; // unit-variance drive
        const double u = std::clamp(base + b, sp.floor_frac, sp.ceil_frac);
        out.samples_kw[i] = u * sp.rated_kw;
    }
    return out;
}

} // namespace

LoadProfile synth_ai_profile(int days, const SynthParams& sp) {
    // training bursts: ~15 min correlation at 5 min sampling, wide swing
    return synth(days, sp, 0.5, 0.21);
}

LoadProfile synth_idc_profile(int days, const SynthParams& sp) {
    // web/storage mix: hour-scale drift, small swing
    return synth(days, sp, 0.9, 0.05);
}

LoadProfile tile_days(const LoadProfile& day, int times) {
    if (times < 1) throw usage_error("tile_days: times must be >= 1");
    if (samples_per_day(day) == 0)
        throw data_error("tile_days: profile does not divide into whole days");
    LoadProfile out = day;
    out.samples_kw.reserve(day.samples_kw.size() * std::size_t(times));
    for (int k = 1; k < times; ++k)
        out.samples_kw.insert(out.samples_kw.end(), day.samples_kw.begin(), day.samples_kw.end());
    return out;
}

} // namespace dcsim
