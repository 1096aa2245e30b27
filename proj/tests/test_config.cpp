#include "doctest.h"

#include "dcsim/config.hpp"
#include "dcsim/errors.hpp"

#include <sstream>

using namespace dcsim;

TEST_CASE("defaults form a complete, self-consistent document") {
    const RunConfig c = RunConfig::from_defaults();

    // engineering units in the file, SI in the parameter blocks
    CHECK(c.rectifier().v_dc_rated == doctest::Approx(1.5e3));
    CHECK(c.rectifier().s_rated == doctest::Approx(2.25e6));
    CHECK(c.dab_params().c_out == doctest::Approx(50e-6));
    CHECK(c.dab_params().v_out_rated == doctest::Approx(800.0));
    CHECK(c.dab_params().f_sw_hz == doctest::Approx(1000.0));
    CHECK(c.num("control.dab_rate_Hz") == doctest::Approx(2000.0));
    CHECK(c.integer("dab.n_parallel") == 3);
    CHECK(c.loss_target(ChainKind::SST) == doctest::Approx(0.01924));
    CHECK(c.loss_target(ChainKind::UPS) == doctest::Approx(0.09553));
    CHECK(c.calibrate_losses());
}

TEST_CASE("stream parsing: comments, blanks, overrides") {
    std::istringstream in(
        "# comment line\n"
        "\n"
        "dab.c_out_uF = 42.5   # trailing comment\n"
        "   \t  \n"
        "engine.window_s=1.5\n");
    const RunConfig c = RunConfig::from_stream(in);
    CHECK(c.dab_params().c_out == doctest::Approx(42.5e-6));
    CHECK(c.num("engine.window_s") == doctest::Approx(1.5));
    // untouched keys keep their defaults
    CHECK(c.dab_params().f_sw_hz == doctest::Approx(1000.0));
}

TEST_CASE("config rejections") {
    auto parse = [](const char* text) {
        std::istringstream in(text);
        return RunConfig::from_stream(in);
    };
    CHECK_THROWS_AS(parse("nosuch.key = 1\n"), config_error);
    CHECK_THROWS_AS(parse("dab.c_out_uF = 40\ndab.c_out_uF = 50\n"), config_error);
    CHECK_THROWS_AS(parse("dab.c_out_uF\n"), config_error);        // no '='
    CHECK_THROWS_AS(parse(" = 3\n"), config_error);                // empty key
    CHECK_THROWS_AS(RunConfig::from_file("/nonexistent/x.cfg"), config_error);

    std::istringstream bad_num("dab.c_out_uF = fifty\n");
    const RunConfig c = RunConfig::from_stream(bad_num);
    CHECK_THROWS_AS(c.num("dab.c_out_uF"), config_error);

    std::istringstream bad_int("dab.n_parallel = 2.5\n");
    const RunConfig ci = RunConfig::from_stream(bad_int);
    CHECK_THROWS_AS(ci.integer("dab.n_parallel"), config_error);

    std::istringstream bad_flag("loss.calibrate = maybe\n");
    const RunConfig cf = RunConfig::from_stream(bad_flag);
    CHECK_THROWS_AS(cf.flag("loss.calibrate"), config_error);

    CHECK_THROWS_AS(c.num("not.a.key"), config_error);
}

TEST_CASE("hash is stable, order-free, and value-sensitive") {
    const RunConfig a = RunConfig::from_defaults();
    const RunConfig b = RunConfig::from_defaults();
    CHECK(a.hash() == b.hash());

    std::istringstream in1("dab.c_out_uF = 55\nengine.window_s = 2\n");
    std::istringstream in2("engine.window_s = 2\ndab.c_out_uF = 55\n");
    const auto h1 = RunConfig::from_stream(in1).hash();
    CHECK(h1 == RunConfig::from_stream(in2).hash());
    CHECK(h1 != a.hash());

    // source spelling is part of the identity: 55.0 vs 55 is a different doc
    std::istringstream in3("dab.c_out_uF = 55.0\nengine.window_s = 2\n");
    CHECK(RunConfig::from_stream(in3).hash() != h1);
}

TEST_CASE("resolved dump reparses to the same document") {
    std::istringstream in("dab.c_out_uF = 37\ncontrol.pll_kp = 250\n");
    const RunConfig c = RunConfig::from_stream(in);

    std::ostringstream dump;
    c.write_resolved(dump);
    std::istringstream back(dump.str());
    const RunConfig c2 = RunConfig::from_stream(back);

    CHECK(c2.hash() == c.hash());
    CHECK(c2.dab_params().c_out == doctest::Approx(37e-6));
}

TEST_CASE("scenario assembly wires the architecture chain") {
    const RunConfig c = RunConfig::from_defaults();
    LoadProfile prof;
    prof.dt_s = 300.0;
    prof.start_epoch_s = 0;
    prof.samples_kw = {1000.0, 1100.0, 1050.0};

    const ScenarioConfig sst = c.scenario(ChainKind::SST, prof);
    CHECK(sst.architecture == ChainKind::SST);
    CHECK(sst.chain.kind == ChainKind::SST);
    CHECK(sst.chain.stages.size() == 2);
    CHECK(sst.v_lv_ref == doctest::Approx(800.0));
    CHECK(sst.profile.samples_kw.size() == 3);

    const ScenarioConfig ups = c.scenario(ChainKind::UPS, prof);
    CHECK(ups.chain.stages.size() == 5);
    // conversion chains differ but the served load does not
    CHECK(ups.it.rated_kw == doctest::Approx(sst.it.rated_kw));
}
