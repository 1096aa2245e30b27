#include <benchmark/benchmark.h>

#include "dcsim/config.hpp"
#include "dcsim/converters.hpp"
#include "dcsim/engine.hpp"
#include "dcsim/metrics.hpp"
#include "dcsim/plant.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace dcsim;

namespace {

ScenarioConfig bench_scenario() {
    LoadProfile prof;
    prof.start_epoch_s = 1767225600;
    prof.dt_s = 300.0;
    prof.samples_kw = {1250.0, 1400.0, 1300.0};
    return RunConfig::from_defaults().scenario(ChainKind::SST, prof);
}

} // namespace

// closed-form transfer power: the innermost plant call of the hot loop
static void BM_DabPower(benchmark::State& state) {
    const DabParams p;
    double phi = 0.1;
    for (auto _ : state) {
        phi = phi > 1.4 ? 0.1 : phi + 1e-3;
        benchmark::DoNotOptimize(dab_power(p, 1.5e3, 0.8e3, phi));
    }
}
BENCHMARK(BM_DabPower);

// one full 2 s electrical window (40k steps at 50 us)
static void BM_ElectricalWindow(benchmark::State& state) {
    const ScenarioConfig cfg = bench_scenario();
    CarryState carry = init_carry(cfg, 1.5e6);
    for (auto _ : state) {
        const WindowSummary w = run_electrical_window(cfg, 1.5e6, carry);
        benchmark::DoNotOptimize(w.v_mean_v);
    }
    state.SetItemsProcessed(int64_t(state.iterations()) *
                            int64_t(cfg.window.window_s / cfg.window.electrical_dt_s));
}
BENCHMARK(BM_ElectricalWindow)->Unit(benchmark::kMillisecond);

// loss-chain fold, called once per profile sample
static void BM_ChainInput(benchmark::State& state) {
    const ArchitectureChain ups = default_ups_chain(2.25);
    double p = 0.9;
    for (auto _ : state) {
        p = p > 2.1 ? 0.9 : p + 1e-3;
        benchmark::DoNotOptimize(chain_input_power(ups, p).p_input_mw);
    }
}
BENCHMARK(BM_ChainInput);

static void BM_Thd(benchmark::State& state) {
    const std::size_t n = std::size_t(state.range(0));
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double th = 2.0 * std::numbers::pi * 50.0 * double(i) / 20000.0;
        x[i] = std::sin(th) + 0.05 * std::sin(3.0 * th);
    }
    for (auto _ : state) benchmark::DoNotOptimize(thd(x, 20000.0, 50.0));
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(n));
}
BENCHMARK(BM_Thd)->Arg(4000)->Arg(30000);

static void BM_BandEnergy(benchmark::State& state) {
    const std::size_t n = std::size_t(state.range(0));
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = std::sin(2.0 * std::numbers::pi * 0.7 * double(i) * 0.02);
    for (auto _ : state) benchmark::DoNotOptimize(band_energy(x, 0.02, 0.1, 3.0));
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(n));
}
BENCHMARK(BM_BandEnergy)->Arg(4096)->Arg(100000);

static void BM_VoltageStats(benchmark::State& state) {
    std::vector<double> u(100000);
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = 0.8 + 0.005 * std::sin(0.001 * double(i));
    for (auto _ : state) benchmark::DoNotOptimize(voltage_stats(u, 0.8).sigma_u);
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(u.size()));
}
BENCHMARK(BM_VoltageStats);

BENCHMARK_MAIN();
