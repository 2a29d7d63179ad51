#pragma once

// End-to-end runs: build the components from a config, run the pre-flight
// checks (boundary signs, ellipticity, radial condition, damping cover),
// march the system to T, and write trace/config/diagnostics/snapshots.

#include <memory>
#include <string>

#include "ewdecay/config.hpp"
#include "ewdecay/diagnostics.hpp"
#include "ewdecay/dynamics.hpp"

namespace ewdecay {

// A pre-flight check failed and the run was not forced.
struct CheckFailedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckSummary {
    SignReport signs;
    EllipticityBounds bounds;
    RadialConditionResult radial;
    CoverReport cover;
    bool cover_checked = false;
    bool out_of_theory_2d = false;

    bool all_pass() const {
        return signs.pass && bounds.elliptic() && radial.holds &&
               (!cover_checked || cover.pass);
    }
    std::string text() const;
};

CheckSummary run_checks(const RunConfig& cfg, const Mesh& mesh,
                        const ElasticityTensorField& field, const DampingField& damping);

struct SimulationResult {
    RunConfig cfg;
    std::shared_ptr<Mesh> mesh;
    std::shared_ptr<AssembledSystem> sys;
    CheckSummary checks;
    DtEstimate dt_estimate;
    double dt = 0;
    long n_steps = 0;
    EnergyTrace trace;
    Snapshots snapshots; // populated when snapshot cadence > 0
    double diss_residual = 0;
    double max_energy_rise = 0; // max over records of (E_{k+1} - E_k) / E(0)
    double runtime_sec = 0;

    double e0() const { return trace.e0(); }
    double e_final() const { return trace.rows.back().e_total; }
};

// Runs the configured simulation. Throws CheckFailedError if a pre-flight
// check fails and cfg.flags.force is unset; BlowUpError if the march
// diverges. Writes outputs to cfg.output.dir when nonempty:
//   trace.csv, resolved_config.json, diagnostics.csv,
//   snap_<step>.vtk + snapshots.csv when snapshot_every > 0.
// `keep_snapshots_in_memory` retains fields for in-process diagnostics even
// when no files are requested.
SimulationResult run_simulation(const RunConfig& cfg,
                                bool keep_snapshots_in_memory = false);

std::string simulation_report(const SimulationResult& res);

} // namespace ewdecay
