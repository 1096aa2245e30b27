#pragma once

#include "dcsim/profiles.hpp"

#include <cstdint>

namespace dcsim {

// Deterministic synthetic IT-load profiles.  Sample i of seed s depends only
// on (s, i, history length), never on global RNG state, so generated files
// are reproducible byte for byte.

struct SynthParams {
    double rated_kw = 2000.0;
    double dt_s = 300.0;
    double floor_frac = 0.46;   // lowest utilization the cluster idles at
    double ceil_frac = 0.995;
    double diurnal_frac = 0.07; // slow day/night swing amplitude
    std::uint64_t seed = 1;
    std::int64_t start_epoch_s = 1767225600; // 2026-01-01T00:00:00Z
};

// AI-cluster style: large fast training bursts (short correlation) on top of
// a mild diurnal base.
LoadProfile synth_ai_profile(int days, const SynthParams& sp = {});

// Conventional-IDC style: same base, slow small fluctuations.
LoadProfile synth_idc_profile(int days, const SynthParams& sp = {});

// Tile one whole-day profile N times (repeating-day month diagnostics).
LoadProfile tile_days(const LoadProfile& day, int times);

} // namespace dcsim
