#include "doctest.h"

#include "dcsim/config.hpp"
#include "dcsim/engine.hpp"
#include "dcsim/errors.hpp"

#include <cmath>
#include <numbers>

using namespace dcsim;

namespace {

LoadProfile flat_profile(std::initializer_list<double> kw, double dt_s = 300.0) {
    LoadProfile p;
    p.start_epoch_s = 1767225600; // 2026-01-01T00:00Z
    p.dt_s = dt_s;
    p.samples_kw = kw;
    return p;
}

ScenarioConfig default_scenario(ChainKind arch, LoadProfile prof) {
    return RunConfig::from_defaults().scenario(arch, std::move(prof));
}

} // namespace

TEST_CASE("warm-started window holds the bus at its reference") {
    const ScenarioConfig cfg =
        default_scenario(ChainKind::SST, flat_profile({1400.0, 1400.0}));

    CarryState carry = init_carry(cfg, 1.5e6);
    const WindowSummary w1 = run_electrical_window(cfg, 1.5e6, carry);
    CHECK(w1.clamp_steps == 0);
    CHECK(std::abs(w1.v_mean_v - 800.0) < 8.0); // within 1 %

    // a second window at the same operating point sits tighter still
    const WindowSummary w2 = run_electrical_window(cfg, 1.5e6, carry);
    CHECK(std::abs(w2.v_mean_v - 800.0) <= std::abs(w1.v_mean_v - 800.0) + 0.5);
    CHECK(w2.p_grid_mean_w > 1.5e6); // grid covers the load plus filter loss
    CHECK(w2.p_grid_mean_w < 1.6e6);
    CHECK(w2.phi_end > 0.0);
    CHECK(w2.phi_end < std::numbers::pi / 2.0);
}

TEST_CASE("electrical windows are bit-deterministic") {
    const ScenarioConfig cfg =
        default_scenario(ChainKind::SST, flat_profile({1400.0, 1400.0}));
    const double loads[] = {1.2e6, 1.45e6, 1.3e6};

    CarryState a = init_carry(cfg, loads[0]);
    CarryState b = init_carry(cfg, loads[0]);
    for (double p : loads) {
        const WindowSummary wa = run_electrical_window(cfg, p, a);
        const WindowSummary wb = run_electrical_window(cfg, p, b);
        CHECK(wa.v_mean_v == wb.v_mean_v); // exact: no RNG, same fp path
        CHECK(wa.p_grid_mean_w == wb.p_grid_mean_w);
        CHECK(wa.phi_end == wb.phi_end);
        CHECK(wa.clamp_steps == wb.clamp_steps);
    }
}

TEST_CASE("sequential run over a short profile: records, metrics, energy identity") {
    const ScenarioConfig cfg = default_scenario(
        ChainKind::SST, flat_profile({1200.0, 1300.0, 1250.0, 1400.0, 1350.0, 1300.0}));

    const SimResult r = run_sequential(cfg);
    REQUIRE(r.samples.size() == 6);
    CHECK(r.profile_dt_s == doctest::Approx(300.0));
    CHECK(r.fault_log.empty());
    CHECK(r.has_bus_metrics);
    CHECK(r.vstats.n > 0);
    CHECK(r.vstats.within2_pct == doctest::Approx(100.0));
    CHECK(std::abs(r.vstats.u_avg - 0.8) < 0.008);

    for (const SampleRecord& s : r.samples) {
        CHECK(s.p_load_mw > 0.0);
        CHECK(s.p_input_mw > s.p_load_mw); // chain always loses something
        CHECK(s.p_loss_mw == doctest::Approx(s.p_input_mw - s.p_load_mw).epsilon(1e-12));
        CHECK(std::abs(s.v_dc_mean_kv - 0.8) < 0.008);
        CHECK(s.phi_rad > 0.0);
        CHECK(s.phi_rad < std::numbers::pi / 2.0);
    }

    CHECK(r.e_input_mwh == doctest::Approx(r.e_load_mwh + r.e_loss_mwh).epsilon(1e-12));
    CHECK(r.loss_ratio_input ==
          doctest::Approx(r.e_loss_mwh / r.e_input_mwh).epsilon(1e-12));
    CHECK(r.audit.residual_rel < 1e-3); // electrical-step energy closure
}

TEST_CASE("UPS path skips the electrical bus but keeps the energy ledger") {
    const LoadProfile prof = flat_profile({1200.0, 1300.0, 1250.0, 1400.0});
    const SimResult ups = run_sequential(default_scenario(ChainKind::UPS, prof));
    const SimResult sst = run_sequential(default_scenario(ChainKind::SST, prof));

    CHECK(!ups.has_bus_metrics);
    CHECK(ups.samples.size() == 4);
    CHECK(ups.e_input_mwh > ups.e_load_mwh);
    // identical served load, very different conversion overhead
    CHECK(ups.e_load_mwh == doctest::Approx(sst.e_load_mwh).epsilon(1e-9));
    CHECK(ups.loss_ratio_input > sst.loss_ratio_input);
}

TEST_CASE("load above the phase-shift transfer ceiling is refused up front") {
    ScenarioConfig cfg =
        default_scenario(ChainKind::SST, flat_profile({8000.0, 8000.0}));
    cfg.it.rated_kw = 8000.0;
    cfg.it.alpha_kw = 7100.0; // keeps the utilization line anchored at 900 kW base
    CHECK_THROWS_AS(run_sequential(cfg), config_error);
}

TEST_CASE("scenario validation failures carry the right taxonomy") {
    const LoadProfile prof = flat_profile({1200.0, 1300.0});

    ScenarioConfig empty = default_scenario(ChainKind::SST, prof);
    empty.profile.samples_kw.clear();
    CHECK_THROWS_AS(run_sequential(empty), data_error);

    ScenarioConfig rate = default_scenario(ChainKind::SST, prof);
    rate.ctrl.dab_rate_hz = 0.0;
    CHECK_THROWS_AS(run_sequential(rate), config_error);

    ScenarioConfig settle = default_scenario(ChainKind::SST, prof);
    settle.window.settle_s = settle.window.window_s; // nothing retained
    CHECK_THROWS_AS(run_sequential(settle), config_error);

    ScenarioConfig mismatch = default_scenario(ChainKind::SST, prof);
    mismatch.chain = default_ups_chain(2.25);
    CHECK_THROWS_AS(run_sequential(mismatch), config_error);
}

TEST_CASE("bus series preloads the cooling lag at steady state") {
    const ScenarioConfig cfg =
        default_scenario(ChainKind::SST, flat_profile({1400.0, 1400.0, 1400.0}));
    const BusSeries s = bus_series(cfg);
    REQUIRE(s.p_load_mw.size() == 3);
    CHECK(s.p_it_kw[0] == doctest::Approx(1400.0));
    // steady state: Q = k1 * P_IT, electrical draw Q / COP
    const double expect =
        (1400.0 + cfg.cooling.k1 * 1400.0 / cfg.cooling.cop) * 1e-3;
    CHECK(s.p_load_mw[0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(s.p_load_mw[1] == doctest::Approx(s.p_load_mw[0]).epsilon(1e-12)); // no start-up transient
}

TEST_CASE("architecture comparison is consistent with its own runs") {
    const LoadProfile prof = flat_profile({1200.0, 1350.0, 1300.0, 1450.0});
    const CompareResult c = compare_architectures(
        default_scenario(ChainKind::SST, prof), default_scenario(ChainKind::UPS, prof));

    CHECK(c.sst.e_load_mwh == doctest::Approx(c.ups.e_load_mwh).epsilon(1e-9));
    const double savings =
        (c.ups.e_input_mwh - c.sst.e_input_mwh) / c.ups.e_input_mwh * 100.0;
    CHECK(c.savings_pct == doctest::Approx(savings).epsilon(1e-9));
    CHECK(c.delta_loss_pp ==
          doctest::Approx((c.ups.loss_ratio_input - c.sst.loss_ratio_input) * 100.0)
              .epsilon(1e-9));
    CHECK(c.savings_pct > 0.0);

    // swapped kinds are rejected
    CHECK_THROWS_AS(compare_architectures(default_scenario(ChainKind::UPS, prof),
                                          default_scenario(ChainKind::SST, prof)),
                    config_error);
}

TEST_CASE("capacitance sweep: row order, argmin, thread-count invariance") {
    const ScenarioConfig base = default_scenario(
        ChainKind::SST, flat_profile({1250.0, 1400.0, 1300.0, 1450.0}));
    const std::vector<double> c_uf = {40.0, 50.0, 60.0};

    const SweepResult one = run_capacitance_sweep(base, c_uf, 1);
    REQUIRE(one.rows.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(one.rows[i].c_out_uf == doctest::Approx(c_uf[i]));
        CHECK(one.rows[i].kr_pp > 0.0);
        CHECK(one.rows[i].band_energy_mw2 >= 0.0);
    }
    // bigger hold-up capacitor, smaller ripple
    CHECK(one.rows[2].kr_pp < one.rows[0].kr_pp);
    REQUIRE(one.argmin_band < one.rows.size());
    for (const SweepRow& row : one.rows)
        CHECK(one.rows[one.argmin_band].band_energy_mw2 <= row.band_energy_mw2);

    const SweepResult two = run_capacitance_sweep(base, c_uf, 2);
    REQUIRE(two.rows.size() == one.rows.size());
    for (std::size_t i = 0; i < one.rows.size(); ++i) {
        CHECK(two.rows[i].kr_pp == one.rows[i].kr_pp); // exact, not approximate
        CHECK(two.rows[i].avg_loss_ratio == one.rows[i].avg_loss_ratio);
        CHECK(two.rows[i].band_energy_mw2 == one.rows[i].band_energy_mw2);
    }
    CHECK(two.argmin_band == one.argmin_band);

    CHECK_THROWS_AS(run_capacitance_sweep(base, {}, 1), usage_error);
    CHECK_THROWS_AS(run_capacitance_sweep(base, {-5.0}, 1), usage_error);
    CHECK_THROWS_AS(
        run_capacitance_sweep(default_scenario(ChainKind::UPS, base.profile), c_uf, 1),
        config_error);
}
