#pragma once

#include "dcsim/profiles.hpp"

#include <string>
#include <vector>

namespace dcsim {

// ---- per-stage conversion loss -----------------------------------------------

// loss(p_out) = c0/1000 + c1*p_out + c2*p_out^2, everything in MW.
// c0 is entered in kW (standby burn), c1 is dimensionless, c2 in 1/MW.
struct StageLossModel {
    std::string name;
    double c0_kw = 0.0;
    double c1 = 0.0;
    double c2_per_mw = 0.0;
    double rating_mw = 2.25;

    double loss_mw(double p_out_mw) const {
        return c0_kw / 1000.0 + c1 * p_out_mw + c2_per_mw * p_out_mw * p_out_mw;
    }
};

enum class ChainKind { SST, UPS };

// Conversion chain ordered grid side -> load side.  SST: MV rectifier + DAB.
// UPS (double-conversion path): inverter, step-up transformer, step-down
// transformer, rectifier, output inverter.
struct ArchitectureChain {
    ChainKind kind = ChainKind::SST;
    std::vector<StageLossModel> stages;
};

// Sanity-check stage coefficients: loss must stay below half the throughput
// over [10 % rating, rating] (checked at the interval ends; the ratio is
// convex in p so interior points are bounded by them).  Throws config_error.
void validate_chain(const ArchitectureChain& chain);

struct ChainPowerResult {
    double p_input_mw = 0.0;
    double p_loss_mw = 0.0;
    std::vector<double> stage_loss_mw; // in chain (grid->load) order
};

// Fold the chain from the load side: each stage's output is the downstream
// stage's input, so upstream stages carry the downstream losses.
ChainPowerResult chain_input_power(const ArchitectureChain& chain, double p_load_mw);

// Energy-weighted input-side loss ratio of the chain over a load series:
//   ratio = sum(loss) / sum(input)
double chain_avg_loss_ratio(const ArchitectureChain& chain, const std::vector<double>& p_load_mw);

struct CalibrationResult {
    ArchitectureChain chain; // all coefficients scaled by `scale`
    double scale = 1.0;
    double achieved_ratio = 0.0;
    int iterations = 0;
};

// Scale the full coefficient vector by one scalar (bisection) so the
// energy-weighted input-side loss ratio over `loads` matches `target_ratio`
// within 1e-4 absolute.  The ratio is continuous and strictly monotone in the
// scale, so the root is unique.  Throws config_error when the target is
// unreachable or the scaled chain violates the sanity bound.
CalibrationResult calibrate_chain(const ArchitectureChain& chain,
                                  double target_ratio,
                                  const std::vector<double>& p_load_mw);

// Convenience: profile (kW) -> load series (MW)
std::vector<double> profile_to_mw(const LoadProfile& p);

// ---- energy storage bookkeeping -----------------------------------------------

// Tracked for reporting; the simulated scenarios run with zero ESS dispatch.
struct EssParams {
    double e_rated_mwh = 2.0;
    double eps_ch = 0.95;
    double eps_dis = 0.95;
    double soc_min = 0.1;
    double soc_max = 0.9;
};

struct SocStepResult {
    double soc = 0.0;
    bool clamped = false;
};

// Charging stores eps_ch * p_ch; discharging drains p_dis / eps_dis:
//   soc' = soc + (eps_ch p_ch - p_dis / eps_dis) * (dt/3600) / e_rated
// p_ch and p_dis are both >= 0 and mutually exclusive.
SocStepResult ess_soc_step(const EssParams& e, double soc,
                           double p_ch_mw, double p_dis_mw, double dt_s);

// ---- default chains ------------------------------------------------------------

ArchitectureChain default_sst_chain(double rating_mw);
ArchitectureChain default_ups_chain(double rating_mw);

} // namespace dcsim
