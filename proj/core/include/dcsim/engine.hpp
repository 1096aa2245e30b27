#pragma once

#include "dcsim/control.hpp"
#include "dcsim/converters.hpp"
#include "dcsim/metrics.hpp"
#include "dcsim/plant.hpp"
#include "dcsim/profiles.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dcsim {

// ---- run configuration -------------------------------------------------------

struct ControlGains {
    PIParams pll_pi{100.0, 2000.0, -0.2 * kTwoPi * 50.0, 0.2 * kTwoPi * 50.0};
    PIParams outer_pi{2.0, 50.0, -1.2, 1.2}; // per-unit DC-link error -> id_ref
    double i_max_pu = 1.2;
    PIParams inner_pi{0.5, 100.0, -2.0, 2.0}; // current error -> modulation drop
    double u_max_pu = 1.2;
    // 800 V bus regulator.  The bulk of the phase shift comes from load-
    // current feedforward; this PI only trims the residual voltage error.
    // Gains are volts -> radians, sized so the sampled loop crosses over
    // near a fifth of the update rate across the 30-60 uF sweep range.
    PIParams dab_pi{2.0e-5, 3.0e-3, -kPi / 2.0, kPi / 2.0};
    // The DAB DSP samples the sensed bus voltage and recomputes the phase
    // shift once per switching half-cycle (zero-order hold in between), as
    // switching-synchronized digital loops do.
    double dab_rate_hz = 2000.0;
    double meas_filter_hz = 500.0; // one-pole low-pass on the bus-voltage sense
};

struct WindowParams {
    double electrical_dt_s = 50e-6;
    double window_s = 2.0;
    double settle_s = 0.5; // discarded from pooled metrics
    double ramp_s = 0.25;  // load slews to the new point inside the settle span
};

struct MetricsParams {
    double tol1_frac = 0.01;
    double tol2_frac = 0.02;
    double band_lo_hz = 0.1;
    double band_hi_hz = 3.0;
    int thd_harmonics = 40;
    std::size_t thd_max_windows = 128; // evenly strided subset of windows
    double pooled_rate_hz = 50.0;      // box-average decimation of grid power
};

// Scenario = architecture + profile + full parameter set.  Deterministic:
// no RNG anywhere in the engine.
struct ScenarioConfig {
    ChainKind architecture = ChainKind::SST;
    LoadProfile profile;          // IT-load samples, kW
    RectifierParams rect{};
    DabParams dab{};
    ControlGains ctrl{};
    WindowParams window{};
    MetricsParams metrics{};
    double ripple_gain = 1.8e-3;
    double ripple_detune = 3.75e-4;
    double v_lv_ref = 800.0;      // V
    ITLoadParams it{};
    CoolingParams cooling{};
    ArchitectureChain chain{};    // calibrated loss chain matching `architecture`
    EssParams ess{};
    double ess_soc0 = 0.5;
};

// ---- state carried between electrical windows ---------------------------------

struct CarryState {
    PLLState pll{};
    RectifierControlState rctl{};
    RectifierState rect{};   // MV node: bridge output cap + DAB input cap merged
    PIState dab_pi{};
    double dab_phi_hold = 0.0; // phase shift held between DSP updates
    long dab_tick = 0;         // electrical steps since the last DSP update
    double v_meas_filt = 800.0;
    DcLinkState lv{};        // 800 V node: n_parallel * c_out
    RippleModel ripple{};
    double cos_g = 1.0, sin_g = 0.0; // grid electrical angle (stiff source)
    double p_prev_w = 0.0;   // operating point of the previous window
    double p_grid_prev_w = 0.0;
    double p_x_prev_w = 0.0;
    double t_elec_s = 0.0;
    bool initialized = false;
};

// ---- results -------------------------------------------------------------------

struct SampleRecord {
    double t_s = 0.0;         // profile time since start
    double p_it_kw = 0.0;
    double p_load_mw = 0.0;   // IT + cooling electrical draw on the bus
    double p_input_mw = 0.0;  // chain input (grid side)
    double p_loss_mw = 0.0;
    double phi_rad = 0.0;     // end-of-window phase shift (SST only)
    double v_dc_mean_kv = 0.0; // retained-window mean of the measured bus voltage
};

struct EnergyAudit {
    // Electrical-time bookkeeping over all simulated windows (SST only).
    double e_grid_j = 0.0;
    double e_load_j = 0.0;
    double e_rloss_j = 0.0;   // AC filter resistance
    double e_stored_j = 0.0;  // end-minus-start stored energy (caps + filter)
    double residual_rel = 0.0; // |grid - load - rloss - stored| / load
};

struct SimResult {
    std::vector<SampleRecord> samples;
    double profile_dt_s = 0.0;

    bool has_bus_metrics = false;  // false on the UPS path (no 800 V bus)
    VoltageStats vstats{};         // pooled measured bus voltage, kV
    double thd_mean = 0.0;
    bool has_band_energy = false;  // pooled series long enough to resolve the band
    double band_energy_mw2 = 0.0;  // in-band energy of the detrended grid power
    std::vector<double> pooled_p_grid_mw; // per-window detrended, at pooled rate
    double pooled_dt_s = 0.0;
    std::vector<double> plot_v_kv; // decimated measured voltage for plots
    double plot_dt_s = 0.0;
    std::vector<double> day_v_mean_kv; // per profile day

    double e_load_mwh = 0.0;
    double e_input_mwh = 0.0;
    double e_loss_mwh = 0.0;
    double loss_ratio_input = 0.0;

    EnergyAudit audit{};
    std::vector<std::string> fault_log;
    double ess_soc_final = 0.0;
};

// ---- window-level API -----------------------------------------------------------

struct WindowSummary {
    double v_mean_v = 0.0;     // retained measured bus voltage mean
    double p_grid_mean_w = 0.0;
    double phi_end = 0.0;
    std::size_t clamp_steps = 0; // steps with the phase shift pinned at +/-pi/2
};

// Optional capture sinks for one window (tests, plotting).
struct WindowCapture {
    std::vector<double> v_meas_v;  // retained samples, electrical rate
    std::vector<double> p_grid_w;
    std::vector<double> phi_rad;
};

// Initialize the carry state at an operating point (warm start: loops preloaded
// at their equilibrium values so the first settle span only absorbs residue).
CarryState init_carry(const ScenarioConfig& cfg, double p_load_w);

// Advance the electrical plant one window at the given bus load; the load
// ramps linearly from carry.p_prev_w over ramp_s, then holds.  Pooled metric
// sinks are internal to run_sequential; `capture`, when non-null, receives
// the retained waveforms.
WindowSummary run_electrical_window(const ScenarioConfig& cfg, double p_load_w,
                                    CarryState& carry, WindowCapture* capture = nullptr);

// ---- scenario drivers -------------------------------------------------------------

SimResult run_sequential(const ScenarioConfig& cfg);

struct CompareResult {
    SimResult sst;
    SimResult ups;
    double savings_pct = 0.0;   // (E_ups_in - E_sst_in) / E_ups_in * 100
    double delta_loss_pp = 0.0; // UPS minus SST input-side ratio, percent points
};

// Runs both chains on the identical bus-load series.
CompareResult compare_architectures(const ScenarioConfig& sst_cfg,
                                    const ScenarioConfig& ups_cfg);

struct SweepRow {
    double c_out_uf = 0.0;
    double kr_pp = 0.0;
    double avg_loss_ratio = 0.0;
    double band_energy_mw2 = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;     // in c_list order
    std::size_t argmin_band = 0;    // row index of minimum band energy
};

// Re-runs the scenario for each output capacitance; rows are independent, so
// the fan-out is embarrassingly parallel and thread count never changes the
// numbers.
SweepResult run_capacitance_sweep(const ScenarioConfig& base,
                                  const std::vector<double>& c_out_uf,
                                  unsigned n_threads = 1);

// Total bus draw for one profile sample: clamped-utilization IT power plus
// the lagged cooling load's electrical draw.  Updates q_cool.
double bus_load_kw(const ScenarioConfig& cfg, double p_profile_kw, double& q_cool_kw);

// The full per-sample series of the above (cooling lag threaded through,
// preloaded at its steady state for the first sample).
struct BusSeries {
    std::vector<double> p_it_kw;
    std::vector<double> p_load_mw;
};
BusSeries bus_series(const ScenarioConfig& cfg);

} // namespace dcsim
