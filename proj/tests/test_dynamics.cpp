#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "ewdecay/runner.hpp"

using namespace ewdecay;

namespace {

RunConfig small_config() {
    RunConfig cfg;
    cfg.geometry.n_r = 8;
    cfg.geometry.n_theta = 48;
    cfg.time.T = 2.0;
    cfg.time.record_every = 4;
    cfg.nonlinearity.enabled = false;
    cfg.initial.amplitude = 0.05;
    cfg.flags.out_of_theory_2d = true;
    return cfg;
}

struct Parts {
    Mesh mesh;
    AssembledSystem sys;
    NonlinearityParams nl;
};

Parts build(const RunConfig& cfg) {
    Parts p;
    p.mesh = build_mesh(cfg);
    p.sys = assemble(p.mesh, build_tensor(cfg), build_damping(cfg, p.mesh));
    p.nl = build_nonlinearity(cfg);
    return p;
}

} // namespace

TEST_CASE("nonlinear force examples") {
    Eigen::VectorXd p3 = Eigen::VectorXd::Constant(3, 3.0);
    CHECK(nonlinear_force(Eigen::Vector3d(0, 0, 0), p3).norm() == 0.0);
    CHECK(nonlinear_force(Eigen::Vector3d(2, 0, 0), p3)[0] == doctest::Approx(8.0));
    Eigen::VectorXd p5 = Eigen::VectorXd::Constant(3, 5.0);
    CHECK(nonlinear_force(Eigen::Vector3d(-1, 0, 0), p5)[0] == doctest::Approx(-1.0));
    // odd symmetry
    Eigen::VectorXd pm = Eigen::VectorXd::Constant(3, 2.5);
    const Eigen::Vector3d u(0.7, -0.3, 0.2);
    CHECK((nonlinear_force(u, pm) + nonlinear_force(-u, pm)).norm() < 1e-15);
}

TEST_CASE("exponent validation") {
    NonlinearityParams nl;
    nl.enabled = true;
    nl.p = Eigen::VectorXd::Constant(3, 5.0);
    CHECK_NOTHROW(nl.validate(3)); // critical power in 3D
    nl.p = Eigen::VectorXd::Constant(3, 5.5);
    CHECK_THROWS_AS(nl.validate(3), ConfigError);
    nl.p = Eigen::VectorXd::Constant(3, 1.0);
    CHECK_THROWS_AS(nl.validate(3), ConfigError);
    nl.p = Eigen::VectorXd::Constant(2, 9.0);
    CHECK_NOTHROW(nl.validate(2)); // 2D accepts any p > 1
}

TEST_CASE("stable dt estimate") {
    RunConfig cfg = small_config();
    cfg.damping.enabled = false;
    const Parts p = build(cfg);

    SUBCASE("zero stiffness caps at dt_max") {
        AssembledSystem z = p.sys;
        z.stiffness.setZero();
        const DtEstimate est = stable_dt(z, 0.9, 0.05);
        CHECK(est.dt == 0.05);
    }
    SUBCASE("halving h roughly halves dt") {
        RunConfig fine = cfg;
        fine.geometry.n_r *= 2;
        fine.geometry.n_theta *= 2;
        const Parts pf = build(fine);
        const double dt0 = stable_dt(p.sys, 0.9, 1.0).dt;
        const double dt1 = stable_dt(pf.sys, 0.9, 1.0).dt;
        CHECK(dt0 / dt1 > 2.0 * 0.8);
        CHECK(dt0 / dt1 < 2.0 * 1.2);
    }
    SUBCASE("doubling the tensor scale shrinks dt by sqrt(2)") {
        RunConfig stiff = cfg;
        stiff.tensor.lambda0 *= 2.0;
        stiff.tensor.mu0 *= 2.0;
        const Parts ps = build(stiff);
        const double dt0 = stable_dt(p.sys, 0.9, 1.0).dt;
        const double dt1 = stable_dt(ps.sys, 0.9, 1.0).dt;
        CHECK(dt0 / dt1 == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
    }
}

TEST_CASE("zero initial data stays identically zero") {
    const RunConfig cfg = small_config();
    const Parts p = build(cfg);
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(p.sys.ndof());
    Simulator sim(p.sys, p.nl, 0.01, z, z);
    for (int s = 0; s < 50; ++s) sim.advance();
    CHECK(sim.u().cwiseAbs().maxCoeff() == 0.0);
    CHECK(sim.record().e_total == 0.0);
}

TEST_CASE("clamped components stay exactly zero during a run") {
    RunConfig cfg = small_config();
    cfg.initial.kind = "fourier-mode";
    const Parts p = build(cfg);
    Eigen::VectorXd u0, v0;
    initial_data(p.mesh, build_initial_spec(cfg), u0, v0);
    Simulator sim(p.sys, p.nl, 0.01, u0, v0);
    for (int s = 0; s < 100; ++s) sim.advance();
    for (int i : p.sys.dirichlet_nodes)
        for (int c = 0; c < 2; ++c) CHECK(sim.u()[i * 2 + c] == 0.0);
}

TEST_CASE("undamped single-mode run conserves the reported energy") {
    RunConfig cfg = small_config();
    cfg.damping.enabled = false;
    cfg.initial.kind = "fourier-mode";
    cfg.time.T = 4.0;
    const SimulationResult res = run_simulation(cfg);
    // Frozen after the first oracle run: the staggered-product energy is
    // conserved to machine precision for the linear system; the stated
    // bound of 2e-3 has orders of magnitude of slack.
    double drift = 0;
    for (const auto& r : res.trace.rows)
        drift = std::max(drift, std::abs(r.e_total - res.e0()) / res.e0());
    CHECK(drift <= 2e-3);
    CHECK(drift <= 1e-10);
}

TEST_CASE("energy scales quadratically with the initial amplitude") {
    RunConfig cfg = small_config();
    cfg.damping.enabled = false;
    RunConfig cfg2 = cfg;
    cfg2.initial.amplitude = 2.0 * cfg.initial.amplitude;
    const SimulationResult r1 = run_simulation(cfg);
    const SimulationResult r2 = run_simulation(cfg2);
    CHECK(r2.e0() == doctest::Approx(4.0 * r1.e0()).epsilon(1e-12));
}

TEST_CASE("identical seeds reproduce identical fields") {
    const RunConfig cfg = small_config();
    const Mesh mesh = build_mesh(cfg);
    InitialDataSpec spec = build_initial_spec(cfg);
    spec.kind = "random-seeded";
    spec.seed = 777;
    Eigen::VectorXd u1, v1, u2, v2;
    initial_data(mesh, spec, u1, v1);
    initial_data(mesh, spec, u2, v2);
    CHECK((u1 - u2).norm() == 0.0);
    CHECK((v1 - v2).norm() == 0.0);
    spec.seed = 778;
    initial_data(mesh, spec, u2, v2);
    CHECK((u1 - u2).norm() > 0.0);
}

TEST_CASE("radial bump initial data is supported away from both boundaries") {
    RunConfig cfg = small_config();
    cfg.initial.kind = "radial-bump";
    const Mesh mesh = build_mesh(cfg);
    Eigen::VectorXd u0, v0;
    initial_data(mesh, build_initial_spec(cfg), u0, v0);
    CHECK(v0.norm() == 0.0);
    CHECK(u0.cwiseAbs().maxCoeff() > 0.0);
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        const double r = mesh.nodes[i].norm();
        const double w = std::hypot(u0[i * 2], u0[i * 2 + 1]);
        if (r < 1.1 - 1e-12 || r > 1.5 + 1e-12) CHECK(w == 0.0);
    }
}

TEST_CASE("unknown initial data kind is rejected") {
    const RunConfig cfg = small_config();
    const Mesh mesh = build_mesh(cfg);
    InitialDataSpec spec;
    spec.kind = "vortex";
    Eigen::VectorXd u0, v0;
    CHECK_THROWS_AS(initial_data(mesh, spec, u0, v0), ConfigError);
}

TEST_CASE("trace is rotation-equivariant for isotropic media") {
    // Rotate the mesh; the radial initial data, damping, and moduli are all
    // rotation-equivariant, so the energy trace must match.
    RunConfig cfg = small_config();
    cfg.initial.kind = "radial-bump"; // rotation-equivariant data
    cfg.time.dt_max = 0.004; // fixed dt for both runs
    cfg.time.T = 1.0;
    const Mesh mesh = build_mesh(cfg);
    Mesh rotated = mesh;
    const double th = 0.7;
    for (auto& x : rotated.nodes) {
        const double c = std::cos(th), s = std::sin(th);
        x = Point(c * x[0] - s * x[1], s * x[0] + c * x[1], 0.0);
    }
    rotated.finalize();

    auto run = [&](const Mesh& m) {
        const auto field = build_tensor(cfg);
        const auto damping = build_damping(cfg, m);
        const auto sys = assemble(m, field, damping);
        Eigen::VectorXd u0, v0;
        initial_data(m, build_initial_spec(cfg), u0, v0);
        Simulator sim(sys, build_nonlinearity(cfg), cfg.time.dt_max, u0, v0);
        std::vector<double> es{sim.record().e_total};
        for (int s = 0; s < 250; ++s) {
            sim.advance();
            es.push_back(sim.record().e_total);
        }
        return es;
    };
    const auto e1 = run(mesh);
    const auto e2 = run(rotated);
    for (std::size_t k = 0; k < e1.size(); ++k)
        CHECK(std::abs(e1[k] - e2[k]) <= 1e-10 * e1[0]);
}

TEST_CASE("vanishing amplitude converges to the linear trace") {
    RunConfig base = small_config();
    base.time.T = 1.0;
    base.nonlinearity.enabled = false;

    auto normalized_final = [&](double amp, bool nl_on) {
        RunConfig cfg = base;
        cfg.nonlinearity.enabled = nl_on;
        cfg.initial.amplitude = amp;
        const SimulationResult res = run_simulation(cfg);
        return res.e_final() / res.e0();
    };
    const double lin = normalized_final(1e-3, false);
    const double d1 = std::abs(normalized_final(0.2, true) - normalized_final(0.2, false));
    const double d2 = std::abs(normalized_final(0.1, true) - normalized_final(0.1, false));
    // p = 3: the nonlinear correction of the normalized trace is O(amp^2).
    CHECK(d2 < d1 / 3.0);
    CHECK(std::abs(normalized_final(1e-3, true) - lin) < 1e-8);
}

TEST_CASE("numerical blow-up is detected and reported") {
    RunConfig cfg = small_config();
    cfg.nonlinearity.enabled = true;
    cfg.nonlinearity.p = {5.0};
    cfg.initial.amplitude = 1e5; // stiff nonlinear forcing breaks the linear CFL
    const Parts p = build(cfg);
    Eigen::VectorXd u0, v0;
    initial_data(p.mesh, build_initial_spec(cfg), u0, v0);
    const double dt = stable_dt(p.sys, 0.9, 0.05).dt;
    Simulator sim(p.sys, p.nl, dt, u0, v0);
    bool blew_up = false;
    try {
        for (int s = 0; s < 2000; ++s) sim.advance();
    } catch (const BlowUpError& e) {
        blew_up = true;
        CHECK(e.step > 0);
    }
    CHECK(blew_up);
}

TEST_CASE("trace csv round-trips exactly") {
    namespace fs = std::filesystem;
    RunConfig cfg = small_config();
    cfg.time.T = 0.5;
    const SimulationResult res = run_simulation(cfg);
    const std::string path = (fs::temp_directory_path() / "ewdecay_trace_rt.csv").string();
    write_trace_csv(res.trace, path);
    const EnergyTrace back = read_trace_csv(path);
    REQUIRE(back.rows.size() == res.trace.rows.size());
    for (std::size_t k = 0; k < back.rows.size(); ++k) {
        CHECK(back.rows[k].t == res.trace.rows[k].t);
        CHECK(back.rows[k].e_total == res.trace.rows[k].e_total);
        CHECK(back.rows[k].d_cum == res.trace.rows[k].d_cum);
    }
    fs::remove(path);
}
