#include "ewdecay/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace ewdecay {

Eigen::VectorXd nonlinear_force(const Eigen::VectorXd& u_node, const Eigen::VectorXd& p) {
    Eigen::VectorXd f(u_node.size());
    for (int c = 0; c < u_node.size(); ++c) {
        const double v = u_node[c];
        f[c] = v == 0.0 ? 0.0 : std::pow(std::abs(v), p[c] - 1.0) * v;
    }
    return f;
}

void add_nonlinear_force(const Eigen::VectorXd& u, const NonlinearityParams& nl, int dim,
                         Eigen::VectorXd& out) {
    if (!nl.enabled) return;
    const int n = static_cast<int>(u.size()) / dim;
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < dim; ++c) {
            const double v = u[i * dim + c];
            if (v != 0.0) out[i * dim + c] -= std::pow(std::abs(v), nl.p[c] - 1.0) * v;
        }
}

DtEstimate stable_dt(const AssembledSystem& sys, double safety, double dt_max) {
    DtEstimate est;
    est.dt = dt_max;
    const int n = sys.ndof();

    Eigen::VectorXd minv(n);
    for (int i = 0; i < sys.n_nodes; ++i)
        for (int c = 0; c < sys.dim; ++c) minv[i * sys.dim + c] = 1.0 / sys.lumped_mass[i];

    if (sys.stiffness.nonZeros() == 0) return est; // no stiffness, dt capped only

    std::mt19937 rng(42);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = unif(rng);
    x.normalize();

    // Rayleigh quotient in the mass inner product; settled when the estimate
    // stops moving over a 10-iteration stride. An underestimate of a few
    // percent is covered by the CFL safety factor.
    double lambda = 0;
    bool converged = false;
    const int min_iter = 30, max_iter = 400, stride = 10;
    std::vector<double> hist;
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd kx = sys.stiffness * x;
        const double xmx = x.dot(x.cwiseQuotient(minv));
        lambda = x.dot(kx) / xmx;
        hist.push_back(lambda);
        if (it >= min_iter &&
            std::abs(lambda - hist[hist.size() - 1 - stride]) <= 1e-4 * std::abs(lambda)) {
            converged = true;
            break;
        }
        Eigen::VectorXd y = minv.asDiagonal() * kx;
        const double norm = y.norm();
        if (norm == 0.0) { lambda = 0; converged = true; break; }
        x = y / norm;
    }

    if (!converged || !(lambda >= 0)) {
        est.gershgorin_fallback = true;
        double bound = 0;
        for (int k = 0; k < sys.stiffness.outerSize(); ++k) {
            double row = 0;
            for (Eigen::SparseMatrix<double>::InnerIterator it(sys.stiffness, k); it; ++it)
                row += std::abs(it.value());
            bound = std::max(bound, row * minv[k]);
        }
        lambda = bound;
        std::fprintf(stderr,
                     "warning: power iteration did not settle; using Gershgorin bound\n");
    }

    est.lambda_max = lambda;
    if (lambda > 0) est.dt = std::min(dt_max, safety * 2.0 / std::sqrt(lambda));
    return est;
}

void write_trace_csv(const EnergyTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open trace file for writing: " + path);
    out << "t,e_kin,e_strain,e_pot,e_total,d_cum\n";
    char buf[200];
    for (const auto& r : trace.rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t,
                      r.e_kin, r.e_strain, r.e_pot, r.e_total, r.d_cum);
        out << buf;
    }
}

EnergyTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open trace file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,e_kin", 0) != 0)
        throw ConfigError("trace file " + path + ": missing or wrong header");
    EnergyTrace trace;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        TraceRecord r;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        if (!(ls >> r.t >> r.e_kin >> r.e_strain >> r.e_pot >> r.e_total >> r.d_cum))
            throw ConfigError("trace file " + path + ":" + std::to_string(lineno) +
                              ": malformed row");
        trace.rows.push_back(r);
    }
    return trace;
}

Simulator::Simulator(const AssembledSystem& sys, const NonlinearityParams& nl, double dt,
                     const Eigen::VectorXd& u0, const Eigen::VectorXd& v0,
                     const ExternalForcing* forcing)
    : sys_(sys), nl_(nl), forcing_(forcing), dt_(dt), u_(u0) {
    if (u0.size() != sys.ndof() || v0.size() != sys.ndof())
        throw ConfigError("simulator: initial data size mismatch");
    nl_.validate(sys.dim);

    Eigen::VectorXd v = v0;
    if (forcing_ && forcing_->set_dirichlet) {
        forcing_->set_dirichlet(0.0, 0.0, u_, v);
    } else {
        sys_.project_dirichlet(u_);
        sys_.project_dirichlet(v);
    }
    // Symmetric half-step initialization: v^{+-1/2} = v0 +- (dt/2) accel(0).
    Eigen::VectorXd a0 = accel(0.0, u_);
    for (int i = 0; i < sys_.n_nodes; ++i) {
        const double rate = sys_.damping_mass[i] / sys_.lumped_mass[i];
        for (int c = 0; c < sys_.dim; ++c) a0[i * sys_.dim + c] -= rate * v[i * sys_.dim + c];
    }
    v_prev_ = v - 0.5 * dt_ * a0;
    v_next_ = v + 0.5 * dt_ * a0;
    if (forcing_ && forcing_->set_dirichlet) {
        Eigen::VectorXd dummy = u_;
        forcing_->set_dirichlet(0.0, -0.5 * dt_, dummy, v_prev_);
        forcing_->set_dirichlet(0.0, 0.5 * dt_, dummy, v_next_);
    } else {
        sys_.project_dirichlet(v_prev_);
        sys_.project_dirichlet(v_next_);
    }
}

Eigen::VectorXd Simulator::accel(double t, const Eigen::VectorXd& u) const {
    Eigen::VectorXd a = -(sys_.stiffness * u);
    for (int i = 0; i < sys_.n_nodes; ++i) {
        const double mi = 1.0 / sys_.lumped_mass[i];
        for (int c = 0; c < sys_.dim; ++c) a[i * sys_.dim + c] *= mi;
    }
    add_nonlinear_force(u, nl_, sys_.dim, a);
    if (forcing_ && forcing_->add_accel) forcing_->add_accel(t, a);
    return a;
}

void Simulator::advance() {
    const int d = sys_.dim;
    // Position update, then the velocity update at the new displacement with
    // the damping term taken as the average of the two staggered velocities.
    u_ += dt_ * v_next_;
    ++step_;
    const double t_n = t();
    const Eigen::VectorXd v_older = v_prev_; // v^{n-3/2}
    v_prev_ = v_next_;
    const Eigen::VectorXd a = accel(t_n, u_);
    for (int i = 0; i < sys_.n_nodes; ++i) {
        const double c = 0.5 * dt_ * sys_.damping_mass[i] / sys_.lumped_mass[i];
        for (int k = 0; k < d; ++k) {
            const int dof = i * d + k;
            v_next_[dof] = ((1.0 - c) * v_prev_[dof] + dt_ * a[dof]) / (1.0 + c);
        }
    }
    if (forcing_ && forcing_->set_dirichlet) {
        forcing_->set_dirichlet(t_n, t_n + 0.5 * dt_, u_, v_next_);
    } else {
        sys_.project_dirichlet(u_);
        sys_.project_dirichlet(v_next_);
    }

    // Dissipation increment over [t_{n-1}, t_n]: the staggered velocity
    // v^{n-1/2} against the mean of the two adjacent integer-step averages.
    // This is a second-order quadrature of int a |u_t|^2, and it is the exact
    // decrement of the reported energy in the linear case.
    double diss = 0;
    for (int i = 0; i < sys_.n_nodes; ++i) {
        const double cm = sys_.damping_mass[i];
        if (cm == 0.0) continue;
        for (int k = 0; k < d; ++k) {
            const int dof = i * d + k;
            diss += cm * v_prev_[dof] *
                    (v_older[dof] + 2.0 * v_prev_[dof] + v_next_[dof]);
        }
    }
    d_cum_ += 0.25 * dt_ * diss;

    if (!u_.allFinite() || !v_next_.allFinite() || u_.cwiseAbs().maxCoeff() > 1e10) {
        const double mx = u_.allFinite() ? u_.cwiseAbs().maxCoeff()
                                         : std::numeric_limits<double>::infinity();
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "solution blew up at step %ld (t = %.6g), max |u| = %.6g", step_,
                      t_n, mx);
        throw BlowUpError(step_, t_n, mx, buf);
    }
}

TraceRecord Simulator::record() const {
    TraceRecord r;
    r.t = t();
    const int d = sys_.dim;
    for (int i = 0; i < sys_.n_nodes; ++i)
        for (int c = 0; c < d; ++c)
            r.e_kin += 0.5 * sys_.lumped_mass[i] * v_prev_[i * d + c] * v_next_[i * d + c];
    r.e_strain = 0.5 * u_.dot(sys_.stiffness * u_);
    if (nl_.enabled)
        for (int i = 0; i < sys_.n_nodes; ++i)
            for (int c = 0; c < d; ++c)
                r.e_pot += sys_.lumped_mass[i] *
                           std::pow(std::abs(u_[i * d + c]), nl_.p[c] + 1.0) /
                           (nl_.p[c] + 1.0);
    r.e_total = r.e_kin + r.e_strain + r.e_pot;
    r.d_cum = d_cum_;
    return r;
}

namespace {

// C^1 bump on [0, 1], zero value and slope at both ends, max 1 at 1/2.
double bump01(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return 16.0 * s * s * (1.0 - s) * (1.0 - s);
}

} // namespace

void initial_data(const Mesh& mesh, const InitialDataSpec& spec, Eigen::VectorXd& u0,
                  Eigen::VectorXd& v0) {
    const int d = mesh.dim;
    const int n = mesh.n_nodes();
    u0 = Eigen::VectorXd::Zero(n * d);
    v0 = Eigen::VectorXd::Zero(n * d);
    if (!(spec.r_hi > spec.r_lo))
        throw ConfigError("initial data: bump support is empty (r_hi <= r_lo)");

    auto envelope = [&](double r) {
        return bump01((r - spec.r_lo) / (spec.r_hi - spec.r_lo));
    };

    if (spec.kind == "radial-bump") {
        for (int i = 0; i < n; ++i) {
            const Point& x = mesh.nodes[i];
            const double r = x.norm();
            const double w = spec.amplitude * envelope(r);
            for (int c = 0; c < d; ++c) u0[i * d + c] = w * x[c] / r;
        }
    } else if (spec.kind == "fourier-mode") {
        for (int i = 0; i < n; ++i) {
            const Point& x = mesh.nodes[i];
            const double r = x.norm();
            const double th = std::atan2(x[1], x[0]);
            const double w = spec.amplitude * envelope(r) * std::cos(spec.mode * th);
            for (int c = 0; c < d; ++c) u0[i * d + c] = w * x[c] / r;
        }
    } else if (spec.kind == "random-seeded") {
        // Random cubic polynomial per component under the bump envelope:
        // smooth, reproducible, zero on the clamped boundary.
        std::mt19937_64 rng(spec.seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        // coefficients for 1, x, y, z, x^2, y^2, z^2, xy, xz, yz, x^3, y^3, z^3
        const int nc = 13;
        Eigen::MatrixXd cu(d, nc), cv(d, nc);
        for (int c = 0; c < d; ++c)
            for (int k = 0; k < nc; ++k) cu(c, k) = unif(rng);
        for (int c = 0; c < d; ++c)
            for (int k = 0; k < nc; ++k) cv(c, k) = unif(rng);
        auto poly = [&](const Eigen::MatrixXd& co, int c, const Point& x) {
            const double X = x[0], Y = x[1], Z = x[2];
            return co(c, 0) + co(c, 1) * X + co(c, 2) * Y + co(c, 3) * Z +
                   co(c, 4) * X * X + co(c, 5) * Y * Y + co(c, 6) * Z * Z +
                   co(c, 7) * X * Y + co(c, 8) * X * Z + co(c, 9) * Y * Z +
                   co(c, 10) * X * X * X + co(c, 11) * Y * Y * Y + co(c, 12) * Z * Z * Z;
        };
        for (int i = 0; i < n; ++i) {
            const Point& x = mesh.nodes[i];
            const double w = spec.amplitude * envelope(x.norm());
            if (w == 0.0) continue;
            for (int c = 0; c < d; ++c) {
                u0[i * d + c] = w * poly(cu, c, x);
                v0[i * d + c] = w * poly(cv, c, x);
            }
        }
    } else {
        throw ConfigError("unknown initial data kind: " + spec.kind);
    }
}

} // namespace ewdecay
