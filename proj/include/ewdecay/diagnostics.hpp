#pragma once

// Post-processing verdicts over energy traces and field snapshots:
//   - dissipation residual: how well E(t) - E(0) + D_cum(t) vanishes
//   - log-linear decay fit E(t) ~ C1 exp(-C2 t) E(0)
//   - space-time multiplier inequality with H = phi(x) x, evaluated term
//     by term on the discrete solution
//   - observability ratio int E dt / int int a |u_t|^2
//   - manufactured-solution convergence study

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ewdecay/config.hpp"
#include "ewdecay/dynamics.hpp"
#include "ewdecay/fem.hpp"

namespace ewdecay {

// max_k |E(t_k) - E(0) + D_cum(t_k)| / E(0). Throws if E(0) is not positive.
double dissipation_residual(const EnergyTrace& trace);

struct DecayFit {
    double c1 = 0;        // exp(intercept) / E(0)
    double c2 = 0;        // -slope
    double r_squared = 0;
    double t_lo = 0, t_hi = 0;
    int n_records = 0;
};

// Least squares on (t, log E) over records in [t_lo, t_hi]; records with
// E <= 1e-14 E(0) are excluded; throws if fewer than 10 usable records or
// nonpositive energies inside the window.
DecayFit fit_decay(const EnergyTrace& trace, double t_lo, double t_hi);

// Multiplier field H = phi(x) x. Mode One is phi == 1; mode Cutoff ramps
// phi from 1 below r_inner down to 0 above r_outer (the same family the
// damping layer uses, reversed).
struct PhiSpec {
    enum class Mode { One, Cutoff } mode = Mode::One;
    double r_inner = 0, r_outer = 0;

    double phi(double r) const;
    double dphi(double r) const;  // d phi / d r
    double div_h(double r, int dim) const; // div(phi x) = dim phi + r phi'
};

struct MultiplierTerms {
    double boundary_flux = 0;   // int_Gamma H(u) . sigma nu
    double boundary_lateral = 0;// 1/2 int_Gamma (|u_t|^2 - sigma:eps - 2F) H.nu
    double endpoint = 0;        // [int u_t . H(u)]_0^T
    double delta_term = 0;      // delta int int phi sigma:eps
    double grad_phi = 0;        // -C int int r |grad phi| |grad u|^2
    double damping_cross = 0;   // int int a u_t . H(u)
    double div_h = 0;           // 1/2 int int (|u_t|^2 - sigma:eps - 2F) div H
};

struct MultiplierReport {
    double lhs = 0;   // boundary side
    double rhs = 0;   // volume/endpoint side
    double slack = 0; // lhs - rhs, nonnegative up to discretization error
    MultiplierTerms terms;
    // Companion estimate with the scalar multiplier P u: lhs_p >= rhs_p.
    double lhs_p = 0, rhs_p = 0, slack_p = 0;
    double e0 = 0;
    double duration = 0;
    double delta = 0;
    bool pass(double tol) const { return slack >= -tol * e0 * duration; }
};

// Evaluates both sides of the multiplier estimate on recorded snapshots by
// element/facet quadrature and trapezoidal time integration. `delta` is the
// admissible constant from the radial-condition checker and `beta` the
// upper ellipticity bound (used for the gradient cross-term constant).
MultiplierReport morawetz_check(const Mesh& mesh, const ElasticityTensorField& field,
                                const DampingField& damping,
                                const NonlinearityParams& nl, const Snapshots& snaps,
                                const PhiSpec& phi, double delta, double beta);

struct ObservabilityReport {
    bool finite = false;
    double rho = 0;        // int_0^T E dt / D_cum(T)
    double e_integral = 0;
    double dissipated = 0;
    double time_horizon = 0;
};

ObservabilityReport observability_ratio(const EnergyTrace& trace);

struct ObservabilityEnsemble {
    std::vector<double> rhos; // one per seed, in seed order
    double rho_max = 0;
    bool all_finite = false;
};

// Runs `n_seeds` seeded variants of the configured problem (seeds
// base.initial.seed, +1, ...) and reports the worst observed ratio.
ObservabilityEnsemble observability_ensemble(const RunConfig& base, int n_seeds);

struct ConvergenceLevel {
    double h = 0;   // max element edge length
    double dt = 0;
    double error = 0; // space-time L2 of u_h - u*
};

struct ConvergenceTable {
    std::vector<ConvergenceLevel> levels;
    std::vector<double> pair_orders; // log2(e_l / e_{l+1})
    double lsq_order = 0;            // least-squares slope of log e vs log h
    bool monotone = true;
};

// Runs the manufactured-solution problem from `base` at `levels` mesh/dt
// refinements (factor 2 each). Requires levels >= 3 and base.mms.enabled.
ConvergenceTable convergence_study(const RunConfig& base, int levels);

std::string format_convergence_table(const ConvergenceTable& t);

// Appends "name,value,tolerance,pass" rows.
void append_diagnostics_csv(const std::string& path, const std::string& name,
                            double value, double tolerance, bool pass);

} // namespace ewdecay
