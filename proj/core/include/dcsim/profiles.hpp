#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dcsim {

// Uniformly sampled load sequence.  Values are average electrical power in kW
// over [i*dt, (i+1)*dt); timestamps in the source CSV mark interval starts.
struct LoadProfile {
    std::int64_t start_epoch_s = 0; // calendar start (Unix seconds, UTC)
    double dt_s = 300.0;            // sampling interval
    std::vector<double> samples_kw;

    std::size_t size() const { return samples_kw.size(); }
    // Time span between the first and last sample points (resampling grid).
    double span_s() const { return dt_s * double(samples_kw.size() - 1); }
    // Energy-covered duration, one full interval per sample.
    double covered_s() const { return dt_s * double(samples_kw.size()); }
};

// IT load: P_IT = p_base + alpha * U, utilization U in [0,1].
struct ITLoadParams {
    double p_base_kw = 900.0;
    double alpha_kw = 1100.0; // added power at full utilization
    double rated_kw = 2000.0;
};

// First-order room/loop thermal lag: tau * dQ/dt + Q = k1 * P_IT.
struct CoolingParams {
    double k1 = 0.3;      // thermal load per unit IT power
    double tau_s = 600.0; // lag time constant
    double cop = 3.5;     // electrical draw of the cooling plant = Q / cop
};

// ---- CSV I/O -------------------------------------------------------------

// Accepted layouts (header required):
//   timestamp,power_kw   timestamps ISO-8601 (YYYY-MM-DD[T ]HH:MM:SS[Z]) or
//                         plain seconds offsets; spacing must be uniform.
//   power_kw              values only; dt taken from default_dt_s.
// Rejects: fewer than 2 rows, non-uniform spacing (>1e-3 s), negative or
// non-finite power, malformed rows.
LoadProfile load_profile_csv(std::istream& in, double default_dt_s = 300.0);
LoadProfile load_profile_csv_file(const std::string& path, double default_dt_s = 300.0);

void write_profile_csv(std::ostream& out, const LoadProfile& p);

// ---- operations ------------------------------------------------------------

// Linear interpolation onto a grid with spacing dt_new_s covering the same
// span.  Grid points shared between old and new grids reproduce the original
// values exactly.
LoadProfile resample(const LoadProfile& p, double dt_new_s);

// Per-day spread compression toward the daily mean:
//   p' = max(0, mean_d + beta * (p - mean_d))
// followed by a per-day multiplicative rescale so each day's energy is
// preserved exactly.  beta = 1 returns the input unchanged; beta = 0
// flattens each day to its mean.  Requires whole days.
LoadProfile compress_fluctuation(const LoadProfile& p, double beta);

// kWh per calendar day.  Requires the sample count to form whole days.
std::vector<double> daily_energy(const LoadProfile& p);

// Number of samples per day if the profile divides into whole days, else 0.
std::size_t samples_per_day(const LoadProfile& p);

// Rack power at a given utilization.
double it_load(const ITLoadParams& it, double utilization);

// Back-solve utilization from a power sample (clamped to [0,1]).
double utilization_from_power(const ITLoadParams& it, double p_kw);

// One implicit-Euler step of the thermal lag; unconditionally stable, so the
// profile-rate dt (typically >> tau/10) is safe:
//   q' = (q + (dt/tau) * k1 * p_it) / (1 + dt/tau)
double cooling_step(const CoolingParams& c, double q_kw, double p_it_kw, double dt_s);

} // namespace dcsim
