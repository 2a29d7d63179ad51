#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ewdecay/runner.hpp"

using namespace ewdecay;

TEST_CASE("config defaults parse from an empty object") {
    const RunConfig cfg = parse_config_text("{}");
    CHECK(cfg.geometry.dim == 2);
    CHECK(cfg.geometry.R0 == 1.0);
    CHECK(cfg.geometry.R1 == 2.0);
    CHECK(cfg.damping.R_d == 1.5);
    CHECK(cfg.damping.a0 == 5.0);
    CHECK(cfg.damping.a_min == doctest::Approx(0.5));
    CHECK(cfg.flags.out_of_theory_2d); // set automatically in 2D
}

TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_AS(parse_config_text(R"({"geometry": {"radius": 1.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"geom": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"time": {"T": 1.0, "extra": 2}})"), ConfigError);
}

TEST_CASE("malformed values are rejected") {
    CHECK_THROWS_AS(parse_config_text("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"time": {"T": "ten"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"time": {"T": -1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"geometry": {"dim": 4}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"tensor": {"kind": "orthotropic"}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"initial": {"kind": "spiral"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"nonlinearity": {"p": []}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"nonlinearity": {"p": 0.5}})"), ConfigError);
}

TEST_CASE("exponent broadcast and per-component lists") {
    const RunConfig one = parse_config_text(R"({"nonlinearity": {"p": 3.0}})");
    const NonlinearityParams nl = build_nonlinearity(one);
    CHECK(nl.p.size() == 2);
    CHECK(nl.p[0] == 3.0);
    CHECK(nl.p[1] == 3.0);

    const RunConfig vec =
        parse_config_text(R"({"nonlinearity": {"p": [2.0, 4.0]}, "geometry": {}})");
    const NonlinearityParams nl2 = build_nonlinearity(vec);
    CHECK(nl2.p[0] == 2.0);
    CHECK(nl2.p[1] == 4.0);

    CHECK_THROWS_AS(
        parse_config_text(R"({"nonlinearity": {"p": [2.0, 3.0, 4.0]}})"),
        ConfigError); // three entries in 2D
}

TEST_CASE("critical exponent enforcement in 3D") {
    CHECK_NOTHROW(parse_config_text(R"({"geometry": {"dim": 3}, "nonlinearity": {"p": 5.0}})"));
    CHECK_THROWS_AS(
        parse_config_text(R"({"geometry": {"dim": 3}, "nonlinearity": {"p": 5.5}})"),
        ConfigError);
}

TEST_CASE("resolved config round-trips through JSON") {
    RunConfig cfg = parse_config_text(R"({
        "geometry": {"dim": 2, "n_r": 6, "n_theta": 40},
        "time": {"T": 1.5, "record_every": 3},
        "initial": {"kind": "fourier-mode", "seed": 99, "amplitude": 0.02}
    })");
    const std::string echo = config_to_json(cfg);
    const RunConfig back = parse_config_text(echo);
    CHECK(config_to_json(back) == echo);
    CHECK(back.time.T == cfg.time.T);
    CHECK(back.initial.seed == cfg.initial.seed);
}

TEST_CASE("a rerun from the resolved config reproduces the trace exactly") {
    namespace fs = std::filesystem;
    RunConfig cfg = parse_config_text(R"({
        "geometry": {"n_r": 6, "n_theta": 40},
        "time": {"T": 0.5, "record_every": 2},
        "nonlinearity": {"enabled": false}
    })");
    const fs::path dir = fs::temp_directory_path() / "ewdecay_cfg_rt";
    fs::remove_all(dir);
    cfg.output.dir = dir.string();
    run_simulation(cfg);

    const RunConfig resolved = load_config((dir / "resolved_config.json").string());
    RunConfig again = resolved;
    const fs::path dir2 = fs::temp_directory_path() / "ewdecay_cfg_rt2";
    fs::remove_all(dir2);
    again.output.dir = dir2.string();
    run_simulation(again);

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    CHECK(slurp(dir / "trace.csv") == slurp(dir2 / "trace.csv"));
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("simulate aborts on failed checks unless forced") {
    RunConfig cfg;
    cfg.geometry.n_r = 4;
    cfg.geometry.n_theta = 16;
    cfg.time.T = 0.1;
    cfg.damping.a_min = 10.0; // unreachable threshold: the cover check fails
    CHECK_THROWS_AS(run_simulation(cfg), CheckFailedError);
    cfg.flags.force = true;
    CHECK_NOTHROW(run_simulation(cfg));
}
