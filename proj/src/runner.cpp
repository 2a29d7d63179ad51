#include "ewdecay/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "ewdecay/vtk.hpp"

namespace ewdecay {

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

} // namespace

std::string CheckSummary::text() const {
    std::ostringstream out;
    out << "pre-flight checks" << (out_of_theory_2d ? "  [out-of-theory-2d]" : "") << "\n";
    out << "  boundary signs   " << (signs.pass ? "PASS" : "FAIL") << "  ("
        << signs.n_facets << " facets";
    if (!signs.pass) out << ", " << signs.violations.size() << " violations";
    out << ")\n";
    out << "  ellipticity      " << (bounds.elliptic() ? "PASS" : "FAIL")
        << "  (alpha = " << fmt("%.12g", bounds.alpha)
        << ", beta = " << fmt("%.12g", bounds.beta);
    if (!bounds.elliptic())
        out << ", worst point (" << fmt("%.6g", bounds.argmin[0]) << ", "
            << fmt("%.6g", bounds.argmin[1]) << ", " << fmt("%.6g", bounds.argmin[2])
            << ")";
    out << ")\n";
    out << "  radial condition " << (radial.holds ? "PASS" : "FAIL")
        << "  (delta_max = " << fmt("%.12g", radial.delta_max) << ", worst point ("
        << fmt("%.6g", radial.worst_point[0]) << ", " << fmt("%.6g", radial.worst_point[1])
        << ", " << fmt("%.6g", radial.worst_point[2]) << "))\n";
    if (cover_checked)
        out << "  damping cover    " << (cover.pass ? "PASS" : "FAIL") << "  ("
            << cover.n_collar_nodes << " collar nodes, " << cover.violations.size()
            << " below a_min)\n";
    return out.str();
}

CheckSummary run_checks(const RunConfig& cfg, const Mesh& mesh,
                        const ElasticityTensorField& field, const DampingField& damping) {
    CheckSummary s;
    s.out_of_theory_2d = cfg.geometry.dim == 2;
    s.signs = check_boundary_signs(mesh, cfg.flags.sign_tol);
    const std::vector<Point> samples = mesh.sample_points();
    s.bounds = ellipticity_bounds(field, samples);
    if (s.bounds.elliptic())
        s.radial = max_delta(field, samples, cfg.flags.bisect_tol, cfg.flags.delta_cap,
                             1e-4 * mesh.max_radius());
    if (damping.enabled) {
        s.cover_checked = true;
        s.cover = check_omega_cover(mesh, damping, cfg.damping.xi, cfg.damping.a_min);
    }
    return s;
}

SimulationResult run_simulation(const RunConfig& cfg, bool keep_snapshots_in_memory) {
    const auto t_start = std::chrono::steady_clock::now();
    cfg.validate();

    SimulationResult res;
    res.cfg = cfg;
    res.cfg.flags.out_of_theory_2d = cfg.geometry.dim == 2;
    res.mesh = std::make_shared<Mesh>(build_mesh(cfg));
    const ElasticityTensorField field = build_tensor(cfg);
    const DampingField damping = build_damping(cfg, *res.mesh);
    const NonlinearityParams nl = build_nonlinearity(cfg);

    res.checks = run_checks(cfg, *res.mesh, field, damping);
    if (!res.checks.all_pass() && !cfg.flags.force)
        throw CheckFailedError("pre-flight checks failed (use force to run anyway):\n" +
                               res.checks.text());

    res.sys = std::make_shared<AssembledSystem>(assemble(*res.mesh, field, damping));
    res.dt_estimate = stable_dt(*res.sys, cfg.time.cfl, cfg.time.dt_max);
    res.n_steps = static_cast<long>(std::ceil(cfg.time.T / res.dt_estimate.dt - 1e-12));
    res.dt = cfg.time.T / static_cast<double>(res.n_steps);

    Eigen::VectorXd u0, v0;
    initial_data(*res.mesh, build_initial_spec(cfg), u0, v0);

    const bool want_files = !cfg.output.dir.empty();
    const bool want_snaps = cfg.output.snapshot_every > 0 || keep_snapshots_in_memory;
    const int snap_every = cfg.output.snapshot_every > 0
                               ? cfg.output.snapshot_every
                               : cfg.time.record_every;
    std::string snap_index;

    namespace fs = std::filesystem;
    if (want_files) fs::create_directories(cfg.output.dir);

    Simulator sim(*res.sys, nl, res.dt, u0, v0);
    auto take_snapshot = [&](long step) {
        if (!want_snaps) return;
        res.snapshots.times.push_back(sim.t());
        res.snapshots.u.push_back(sim.u());
        res.snapshots.v.push_back(sim.v_centered());
        if (want_files && cfg.output.snapshot_every > 0) {
            char name[64];
            std::snprintf(name, sizeof(name), "snap_%06ld.vtk", step);
            const std::string path = (fs::path(cfg.output.dir) / name).string();
            write_vtk_snapshot(*res.mesh, sim.u(), sim.v_centered(), step, sim.t(), path);
            char row[128];
            std::snprintf(row, sizeof(row), "%ld,%.17g,%s\n", step, sim.t(), name);
            snap_index += row;
        }
    };

    res.trace.rows.push_back(sim.record());
    take_snapshot(0);
    for (long s = 1; s <= res.n_steps; ++s) {
        sim.advance();
        if (s % cfg.time.record_every == 0 || s == res.n_steps)
            res.trace.rows.push_back(sim.record());
        if ((s % snap_every == 0 || s == res.n_steps)) take_snapshot(s);
    }

    res.diss_residual = dissipation_residual(res.trace);
    const double e0 = res.trace.e0();
    for (std::size_t k = 1; k < res.trace.rows.size(); ++k)
        res.max_energy_rise =
            std::max(res.max_energy_rise,
                     (res.trace.rows[k].e_total - res.trace.rows[k - 1].e_total) / e0);

    res.runtime_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                    t_start)
                          .count();

    if (want_files) {
        const fs::path dir(cfg.output.dir);
        write_trace_csv(res.trace, (dir / "trace.csv").string());
        save_config(res.cfg, (dir / "resolved_config.json").string());
        if (!snap_index.empty())
            write_file_atomic((dir / "snapshots.csv").string(),
                              "step,t,file\n" + snap_index);
        const std::string diag = (dir / "diagnostics.csv").string();
        append_diagnostics_csv(diag, "dissipation_residual", res.diss_residual, 5e-3,
                               res.diss_residual <= 5e-3);
        append_diagnostics_csv(diag, "max_energy_rise", res.max_energy_rise, 1e-6,
                               res.max_energy_rise <= 1e-6);
        append_diagnostics_csv(diag, "energy_ratio_final", res.e_final() / e0, 0.0, true);
        if (damping.enabled) {
            const ObservabilityReport obs = observability_ratio(res.trace);
            append_diagnostics_csv(diag, "observability_rho", obs.rho, 0.0, obs.finite);
        }
    }
    return res;
}

std::string simulation_report(const SimulationResult& res) {
    std::ostringstream out;
    out << res.checks.text();
    out << "run\n";
    out << "  nodes            " << res.mesh->n_nodes() << "  (dim " << res.mesh->dim
        << ")\n";
    out << "  dt               " << fmt("%.6g", res.dt) << "  (" << res.n_steps
        << " steps" << (res.dt_estimate.gershgorin_fallback ? ", gershgorin dt bound" : "")
        << ")\n";
    out << "  E(0)             " << fmt("%.12g", res.e0()) << "\n";
    out << "  E(T)             " << fmt("%.12g", res.e_final()) << "\n";
    out << "  E(T)/E(0)        " << fmt("%.12g", res.e_final() / res.e0()) << "\n";
    out << "  dissipated       " << fmt("%.12g", res.trace.rows.back().d_cum) << "\n";
    out << "  diss. residual   " << fmt("%.3e", res.diss_residual) << "\n";
    out << "  max energy rise  " << fmt("%.3e", res.max_energy_rise) << "\n";
    out << "  runtime          " << fmt("%.2f", res.runtime_sec) << " s\n";
    return out.str();
}

} // namespace ewdecay
