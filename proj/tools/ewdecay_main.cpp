// ewdecay: checkers, simulation, and diagnostics for the damped anisotropic
// elastic wave system on annulus/shell domains.
//
// Exit codes: 0 pass, 1 check/assertion failure, 2 config error, 3 blow-up.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ewdecay/diagnostics.hpp"
#include "ewdecay/mms.hpp"
#include "ewdecay/runner.hpp"
#include "ewdecay/vtk.hpp"

namespace fs = std::filesystem;
using namespace ewdecay;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBlowUp = 3;

int cmd_check_tensor(const std::string& config_path) {
    const RunConfig cfg = load_config(config_path);
    const Mesh mesh = build_mesh(cfg);
    const ElasticityTensorField field = build_tensor(cfg);
    const DampingField damping = build_damping(cfg, mesh);
    const CheckSummary checks = run_checks(cfg, mesh, field, damping);

    std::printf("tensor check%s\n",
                cfg.geometry.dim == 2 ? "  [out-of-theory-2d]" : "");
    std::printf("  alpha       %.12g\n", checks.bounds.alpha);
    std::printf("  beta        %.12g\n", checks.bounds.beta);
    std::printf("  delta_max   %.12g\n", checks.radial.delta_max);
    const Point& w = checks.bounds.elliptic() ? checks.radial.worst_point
                                              : checks.bounds.argmin;
    std::printf("  worst_point (%.6g, %.6g, %.6g)\n", w[0], w[1], w[2]);
    const bool pass = checks.bounds.elliptic() && checks.radial.holds;
    std::printf("  result      %s\n", pass ? "PASS" : "FAIL");
    return pass ? kExitPass : kExitCheckFail;
}

int cmd_check_geometry(const std::string& config_path, double xi_override) {
    RunConfig cfg = load_config(config_path);
    if (xi_override >= 0.0) cfg.damping.xi = xi_override;
    const Mesh mesh = build_mesh(cfg);
    const DampingField damping = build_damping(cfg, mesh);

    const SignReport signs = check_boundary_signs(mesh, cfg.flags.sign_tol);
    std::printf("geometry check  (%d nodes, %d elements, %zu facets)\n", mesh.n_nodes(),
                mesh.n_elems(), mesh.facets.size());
    std::printf("  boundary signs  %s", signs.pass ? "PASS" : "FAIL");
    if (!signs.pass)
        std::printf("  (%zu violations, worst %.3e)", signs.violations.size(),
                    signs.worst);
    std::printf("\n");

    bool pass = signs.pass;
    if (damping.enabled) {
        const CoverReport cover =
            check_omega_cover(mesh, damping, cfg.damping.xi, cfg.damping.a_min);
        std::printf("  damping cover   %s  (xi = %g, a_min = %g, %d collar nodes",
                    cover.pass ? "PASS" : "FAIL", cover.xi, cover.a_min,
                    cover.n_collar_nodes);
        if (!cover.pass) std::printf(", %zu below a_min", cover.violations.size());
        std::printf(")\n");
        pass = pass && cover.pass;
    }
    std::printf("  result          %s\n", pass ? "PASS" : "FAIL");
    return pass ? kExitPass : kExitCheckFail;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, bool force) {
    RunConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    if (force) cfg.flags.force = true;
    const SimulationResult res = run_simulation(cfg);
    std::fputs(simulation_report(res).c_str(), stdout);
    if (!cfg.output.dir.empty())
        std::printf("outputs written to %s\n", cfg.output.dir.c_str());
    return res.checks.all_pass() ? kExitPass : kExitCheckFail;
}

int cmd_fit_decay(const std::string& trace_path, double t0, double t1) {
    const EnergyTrace trace = read_trace_csv(trace_path);
    const DecayFit fit = fit_decay(trace, t0, t1);
    std::printf("decay fit over [%g, %g]  (%d records)\n", t0, t1, fit.n_records);
    std::printf("  C1        %.12g\n", fit.c1);
    std::printf("  C2        %.12g\n", fit.c2);
    std::printf("  r_squared %.12g\n", fit.r_squared);
    const bool pass = fit.c2 > 0.0 && fit.r_squared >= 0.95;
    std::printf("  result    %s\n", pass ? "PASS" : "FAIL");
    return pass ? kExitPass : kExitCheckFail;
}

int cmd_verify_morawetz(const std::string& run_dir, const std::string& phi_mode,
                        double tol) {
    const fs::path dir(run_dir);
    const RunConfig cfg = load_config((dir / "resolved_config.json").string());
    const Mesh mesh = build_mesh(cfg);
    const ElasticityTensorField field = build_tensor(cfg);
    const DampingField damping = build_damping(cfg, mesh);
    const NonlinearityParams nl = build_nonlinearity(cfg);
    const EnergyTrace trace = read_trace_csv((dir / "trace.csv").string());

    // Snapshot files listed in the index written by `simulate`.
    std::ifstream index((dir / "snapshots.csv").string());
    if (!index)
        throw ConfigError("run directory has no snapshots.csv; rerun simulate with "
                          "output.snapshot_every > 0");
    std::string line;
    std::getline(index, line); // header
    Snapshots snaps;
    while (std::getline(index, line)) {
        if (line.empty()) continue;
        const auto c2pos = line.rfind(',');
        const std::string file = line.substr(c2pos + 1);
        const VtkSnapshot s = read_vtk_snapshot((dir / file).string(), mesh.dim);
        snaps.times.push_back(s.t);
        snaps.u.push_back(s.u);
        snaps.v.push_back(s.v);
    }

    const std::vector<Point> samples = mesh.sample_points();
    const EllipticityBounds bounds = ellipticity_bounds(field, samples);
    const RadialConditionResult radial =
        max_delta(field, samples, cfg.flags.bisect_tol, cfg.flags.delta_cap,
                  1e-4 * mesh.max_radius());

    PhiSpec phi;
    if (phi_mode == "cutoff") {
        phi.mode = PhiSpec::Mode::Cutoff;
        phi.r_inner = cfg.damping.R_d;
        phi.r_outer = 0.5 * (cfg.damping.R_d + cfg.geometry.R1);
    }
    const MultiplierReport rep =
        morawetz_check(mesh, field, damping, nl, snaps, phi, radial.delta_max,
                       bounds.beta);
    const double e0 = trace.e0();

    std::printf("multiplier check  (phi = %s, delta = %.6g, %zu snapshots)\n",
                phi_mode.c_str(), rep.delta, snaps.times.size());
    std::printf("  boundary flux     %.6e\n", rep.terms.boundary_flux);
    std::printf("  boundary lateral  %.6e\n", rep.terms.boundary_lateral);
    std::printf("  endpoint          %.6e\n", rep.terms.endpoint);
    std::printf("  delta term        %.6e\n", rep.terms.delta_term);
    std::printf("  grad-phi term     %.6e\n", rep.terms.grad_phi);
    std::printf("  damping cross     %.6e\n", rep.terms.damping_cross);
    std::printf("  div-H term        %.6e\n", rep.terms.div_h);
    std::printf("  lhs %.6e  rhs %.6e  slack %.6e\n", rep.lhs, rep.rhs, rep.slack);
    std::printf("  scalar-multiplier slack %.6e  (report only)\n", rep.slack_p);
    const double floor = -tol * e0 * rep.duration;
    const bool pass = rep.slack >= floor;
    std::printf("  result  %s  (floor %.3e)\n", pass ? "PASS" : "FAIL", floor);
    return pass ? kExitPass : kExitCheckFail;
}

int cmd_convergence(const std::string& config_path, int levels) {
    const RunConfig cfg = load_config(config_path);
    const ConvergenceTable table = convergence_study(cfg, levels);
    std::printf("manufactured-solution convergence (%s, %d levels)\n",
                cfg.mms.kind.c_str(), levels);
    std::fputs(format_convergence_table(table).c_str(), stdout);
    const bool pass = table.lsq_order >= 1.8;
    std::printf("  result  %s\n", pass ? "PASS" : "FAIL");
    return pass ? kExitPass : kExitCheckFail;
}

} // namespace

int main(int argc, char** argv) {
    apply_thread_cap();

    CLI::App app{"damped elastic wave laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir, trace_path, run_dir, phi_mode = "one";
    double t0 = 2.0, t1 = 10.0, xi_override = -1.0, tol = 1e-2;
    int levels = 3;
    bool force = false;

    auto* c_tensor = app.add_subcommand("check-tensor", "tensor field hypotheses");
    c_tensor->add_option("--config", config_path, "config file")->required();

    auto* c_geom = app.add_subcommand("check-geometry", "mesh and damping-cover checks");
    c_geom->add_option("--config", config_path, "config file")->required();
    c_geom->add_option("--xi", xi_override, "collar thickness override");

    auto* c_sim = app.add_subcommand("simulate", "run the damped wave system");
    c_sim->add_option("--config", config_path, "config file")->required();
    c_sim->add_option("--out", out_dir, "output directory");
    c_sim->add_flag("--force", force, "run even if pre-flight checks fail");

    auto* c_fit = app.add_subcommand("fit-decay", "log-linear decay fit of a trace");
    c_fit->add_option("--trace", trace_path, "trace.csv path")->required();
    c_fit->add_option("--t0", t0, "window start");
    c_fit->add_option("--t1", t1, "window end");

    auto* c_mor = app.add_subcommand("verify-morawetz", "multiplier inequality check");
    c_mor->add_option("--run", run_dir, "run directory from simulate")->required();
    c_mor->add_option("--phi", phi_mode, "multiplier cutoff: one | cutoff")
        ->check(CLI::IsMember({"one", "cutoff"}));
    c_mor->add_option("--tol", tol, "relative slack floor");

    auto* c_conv = app.add_subcommand("convergence", "manufactured-solution study");
    c_conv->add_option("--config", config_path, "config file (mms block enabled)")
        ->required();
    c_conv->add_option("--levels", levels, "refinement levels (>= 3)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitPass : kExitConfig;
    }

    try {
        if (c_tensor->parsed()) return cmd_check_tensor(config_path);
        if (c_geom->parsed()) return cmd_check_geometry(config_path, xi_override);
        if (c_sim->parsed()) return cmd_simulate(config_path, out_dir, force);
        if (c_fit->parsed()) return cmd_fit_decay(trace_path, t0, t1);
        if (c_mor->parsed()) return cmd_verify_morawetz(run_dir, phi_mode, tol);
        if (c_conv->parsed()) return cmd_convergence(config_path, levels);
    } catch (const BlowUpError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBlowUp;
    } catch (const CheckFailedError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCheckFail;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitConfig;
}
