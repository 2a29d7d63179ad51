#pragma once

// Run configuration: JSON in, schema-checked (unknown keys rejected),
// defaults filled in, and echoed back fully resolved next to every run's
// outputs so a run can be reproduced from its own artifacts.

#include <cstdint>
#include <string>
#include <vector>

#include "ewdecay/dynamics.hpp"
#include "ewdecay/geometry.hpp"
#include "ewdecay/tensor.hpp"

namespace ewdecay {

struct GeometryConfig {
    int dim = 2;
    double R0 = 1.0;
    double R1 = 2.0;
    int n_r = 24;      // radial layers (2D default ~5000 nodes with n_theta)
    int n_theta = 200; // 2D angular resolution
    int n_face = 6;    // 3D cubed-sphere panel resolution
    int n_r_3d = 6;    // 3D radial layers
    std::string mesh_path; // nonempty: load instead of generating
};

struct TensorConfig {
    std::string kind = "constant-lame"; // constant-lame | lame-quadratic | lame-exponential
    double lambda0 = 1.0;
    double mu0 = 1.0;
    double eps = 0.25; // lame-quadratic: mu(r) = mu0 (1 + eps r^2)
    double s = -1.0;   // lame-exponential: mu(r) = mu0 exp(s r)
};

struct DampingConfig {
    bool enabled = true;
    double R_d = 1.5;
    double a0 = 5.0;
    double xi = 0.2;
    double a_min = 0.5; // cover check threshold (default a0 / 10)
};

struct NonlinearityConfig {
    bool enabled = true;
    std::vector<double> p{3.0}; // broadcast to all components if a single entry
};

struct TimeConfig {
    double T = 10.0;
    double cfl = 0.9;
    int record_every = 5;
    double dt_max = 0.05;
};

struct InitialConfig {
    std::string kind = "random-seeded";
    std::uint64_t seed = 2;
    double amplitude = 0.05;
    int mode = 2;
};

struct OutputConfig {
    std::string dir;        // empty: nothing written
    int snapshot_every = 0; // 0: no snapshots
};

struct FlagsConfig {
    bool force = false;            // run even if pre-run checks fail
    bool out_of_theory_2d = false; // set automatically for dim == 2
    double delta_cap = 1.0;        // radial-condition search cap (2 for decreasing media)
    double bisect_tol = 1e-6;
    double sign_tol = 1e-8;
};

struct MmsConfig {
    bool enabled = false;
    std::string kind = "radial"; // linear | radial
    double omega = 2.0;
    double amplitude = 0.1;
};

struct RunConfig {
    GeometryConfig geometry;
    TensorConfig tensor;
    DampingConfig damping;
    NonlinearityConfig nonlinearity;
    TimeConfig time;
    InitialConfig initial;
    OutputConfig output;
    FlagsConfig flags;
    MmsConfig mms;

    void validate() const; // throws ConfigError
};

RunConfig parse_config_text(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& cfg); // fully resolved echo
void save_config(const RunConfig& cfg, const std::string& path);

// Component builders shared by the CLI commands and the test suites.
Mesh build_mesh(const RunConfig& cfg);
ElasticityTensorField build_tensor(const RunConfig& cfg);
DampingField build_damping(const RunConfig& cfg, const Mesh& mesh);
NonlinearityParams build_nonlinearity(const RunConfig& cfg);
InitialDataSpec build_initial_spec(const RunConfig& cfg);

// Atomic text file write (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

// Reads EWDECAY_THREADS and caps Eigen's internal parallelism; the solver
// kernels themselves are sequential and deterministic.
void apply_thread_cap();

} // namespace ewdecay
