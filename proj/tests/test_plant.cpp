#include "doctest.h"

#include "dcsim/errors.hpp"
#include "dcsim/plant.hpp"

#include <cmath>

using namespace dcsim;

TEST_CASE("stage loss polynomial and the grid->load fold") {
    StageLossModel st{"x", 10.0, 0.02, 0.01, 2.25};
    // 10 kW standby + 2 % proportional + 0.01/MW quadratic at 1.5 MW
    CHECK(st.loss_mw(1.5) == doctest::Approx(0.01 + 0.03 + 0.0225).epsilon(1e-12));

    // two stages: downstream loss rides through the upstream stage
    ArchitectureChain c;
    c.kind = ChainKind::SST;
    c.stages = {{"up", 0.0, 0.10, 0.0, 2.25}, {"down", 0.0, 0.10, 0.0, 2.25}};
    const ChainPowerResult r = chain_input_power(c, 1.0);
    CHECK(r.stage_loss_mw[1] == doctest::Approx(0.10));        // sees the load
    CHECK(r.stage_loss_mw[0] == doctest::Approx(0.11));        // sees load + 0.1
    CHECK(r.p_input_mw == doctest::Approx(1.21));
    CHECK(r.p_loss_mw == doctest::Approx(0.21));

    CHECK_THROWS_AS(chain_input_power(c, -1.0), data_error);
}

TEST_CASE("chain validation rejects the wrong shape or absurd coefficients") {
    ArchitectureChain sst = default_sst_chain(2.25);
    ArchitectureChain ups = default_ups_chain(2.25);
    validate_chain(sst); // defaults pass
    validate_chain(ups);

    ArchitectureChain wrong = sst;
    wrong.stages.push_back(wrong.stages[0]);
    CHECK_THROWS_AS(validate_chain(wrong), config_error);

    ArchitectureChain hot = sst;
    hot.stages[0].c1 = 0.6; // 60 % proportional loss
    CHECK_THROWS_AS(validate_chain(hot), config_error);

    ArchitectureChain neg = sst;
    neg.stages[0].c0_kw = -1.0;
    CHECK_THROWS_AS(validate_chain(neg), config_error);
}

TEST_CASE("energy-weighted loss ratio") {
    ArchitectureChain c;
    c.kind = ChainKind::SST;
    c.stages = {{"a", 0.0, 0.0, 0.0, 2.25}, {"b", 0.0, 0.25, 0.0, 2.25}};
    // loads 1 and 3 MW: losses 0.25 / 0.75, inputs 1.25 / 3.75
    CHECK(chain_avg_loss_ratio(c, {1.0, 3.0}) == doctest::Approx(1.0 / 5.0).epsilon(1e-12));
    CHECK_THROWS_AS(chain_avg_loss_ratio(c, {0.0, 0.0}), data_error);
}

TEST_CASE("calibration scales the whole coefficient vector onto the target") {
    const std::vector<double> loads = {0.9, 1.4, 1.8, 2.1, 1.2, 1.6};

    const ArchitectureChain sst = default_sst_chain(2.25);
    const CalibrationResult r = calibrate_chain(sst, 0.05, loads);
    CHECK(r.achieved_ratio == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(chain_avg_loss_ratio(r.chain, loads) == doctest::Approx(0.05).epsilon(1e-9));
    // scaling is uniform across every coefficient
    for (std::size_t i = 0; i < sst.stages.size(); ++i) {
        CHECK(r.chain.stages[i].c1 == doctest::Approx(sst.stages[i].c1 * r.scale));
        CHECK(r.chain.stages[i].c0_kw == doctest::Approx(sst.stages[i].c0_kw * r.scale));
        CHECK(r.chain.stages[i].c2_per_mw == doctest::Approx(sst.stages[i].c2_per_mw * r.scale));
    }

    // reference targets for both architectures
    CHECK(calibrate_chain(sst, 0.01924, loads).achieved_ratio ==
          doctest::Approx(0.01924).epsilon(1e-9));
    CHECK(calibrate_chain(default_ups_chain(2.25), 0.09553, loads).achieved_ratio ==
          doctest::Approx(0.09553).epsilon(1e-9));

    // out-of-range targets are config errors (0.5 would breach the sanity bound)
    CHECK_THROWS_AS(calibrate_chain(sst, 0.0, loads), config_error);
    CHECK_THROWS_AS(calibrate_chain(sst, 0.49, loads), config_error);
    CHECK_THROWS_AS(calibrate_chain(sst, 0.05, {}), data_error);
}

TEST_CASE("default chains: SST path is the leaner one everywhere in range") {
    const ArchitectureChain sst = default_sst_chain(2.25);
    const ArchitectureChain ups = default_ups_chain(2.25);
    for (double p = 0.4; p <= 2.2; p += 0.2) {
        const double ls = chain_input_power(sst, p).p_loss_mw;
        const double lu = chain_input_power(ups, p).p_loss_mw;
        CHECK(lu > 2.0 * ls);
    }
}

TEST_CASE("battery SOC bookkeeping") {
    const EssParams e{}; // 2 MWh, 0.95/0.95, [0.1, 0.9]

    // one hour of 0.5 MW charging stores 0.95 * 0.5 MWh
    const SocStepResult ch = ess_soc_step(e, 0.5, 0.5, 0.0, 3600.0);
    CHECK(ch.soc == doctest::Approx(0.5 + 0.95 * 0.5 / 2.0).epsilon(1e-12));
    CHECK_FALSE(ch.clamped);

    // discharging drains p/eps
    const SocStepResult dis = ess_soc_step(e, 0.5, 0.0, 0.5, 3600.0);
    CHECK(dis.soc == doctest::Approx(0.5 - 0.5 / 0.95 / 2.0).epsilon(1e-12));

    // limits clamp and report it
    CHECK(ess_soc_step(e, 0.89, 2.0, 0.0, 3600.0).clamped);
    CHECK(ess_soc_step(e, 0.89, 2.0, 0.0, 3600.0).soc == doctest::Approx(0.9));
    CHECK(ess_soc_step(e, 0.11, 0.0, 2.0, 3600.0).soc == doctest::Approx(0.1));

    // idle step keeps the state
    CHECK(ess_soc_step(e, 0.42, 0.0, 0.0, 300.0).soc == doctest::Approx(0.42));

    CHECK_THROWS_AS(ess_soc_step(e, 0.5, 1.0, 1.0, 60.0), data_error);
    CHECK_THROWS_AS(ess_soc_step(e, 0.5, -1.0, 0.0, 60.0), data_error);
}

TEST_CASE("profile to MW helper") {
    LoadProfile p;
    p.dt_s = 300.0;
    p.samples_kw = {1500.0, 2000.0};
    const auto mw = profile_to_mw(p);
    CHECK(mw[0] == doctest::Approx(1.5));
    CHECK(mw[1] == doctest::Approx(2.0));
}
