#include "ewdecay/mms.hpp"

#include <cmath>

namespace ewdecay {

ManufacturedSolution::ManufacturedSolution(std::string kind, int dim, double lambda,
                                           double mu, double omega, double amplitude,
                                           double R0, double R1)
    : kind_(std::move(kind)), dim_(dim), lambda_(lambda), mu_(mu), omega_(omega),
      amp_(amplitude), R0_(R0), R1_(R1) {
    if (kind_ != "linear" && kind_ != "radial")
        throw ConfigError("manufactured solution: unknown kind '" + kind_ + "'");
    // Radial profile wavenumber: zero at the clamped boundary, nonzero value
    // and traction at the free boundary.
    k_ = 1.3 * M_PI / (R1_ - R0_);
    B_ << 0.3, 0.1, -0.05, -0.2, 0.4, 0.15, 0.1, -0.1, 0.25;
    c_ << 0.2, -0.1, 0.15;
}

double ManufacturedSolution::g(double r) const { return std::sin(k_ * (r - R0_)); }
double ManufacturedSolution::gp(double r) const { return k_ * std::cos(k_ * (r - R0_)); }
double ManufacturedSolution::gpp(double r) const {
    return -k_ * k_ * std::sin(k_ * (r - R0_));
}

Eigen::Vector3d ManufacturedSolution::spatial(const Point& x) const {
    Eigen::Vector3d s = Eigen::Vector3d::Zero();
    if (kind_ == "linear") {
        for (int i = 0; i < dim_; ++i) {
            s[i] = c_[i];
            for (int j = 0; j < dim_; ++j) s[i] += B_(i, j) * x[j];
        }
    } else {
        const double r = x.norm();
        const double G = g(r) / r;
        for (int i = 0; i < dim_; ++i) s[i] = G * x[i];
    }
    return s;
}

Eigen::MatrixXd ManufacturedSolution::spatial_strain(const Point& x) const {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(dim_, dim_);
    if (kind_ == "linear") {
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) e(i, j) = 0.5 * (B_(i, j) + B_(j, i));
    } else {
        const double r = x.norm();
        const double G = g(r) / r;
        const double Gp = gp(r) / r - g(r) / (r * r);
        for (int i = 0; i < dim_; ++i) {
            e(i, i) = G;
            for (int j = 0; j < dim_; ++j) e(i, j) += (Gp / r) * x[i] * x[j];
        }
    }
    return e;
}

Eigen::Vector3d ManufacturedSolution::spatial_div_stress(const Point& x) const {
    Eigen::Vector3d out = Eigen::Vector3d::Zero();
    if (kind_ == "linear") return out; // constant stress
    const double r = x.norm();
    const double G = g(r) / r;
    const double Gp = gp(r) / r - G / r;
    const double Gpp = gpp(r) / r - 2.0 * gp(r) / (r * r) + 2.0 * g(r) / (r * r * r);
    // A curl-free radial field: div sigma = (lambda + 2 mu) (G'' + (n+1) G'/r) x
    const double factor = (lambda_ + 2.0 * mu_) * (Gpp + (dim_ + 1) * Gp / r);
    for (int i = 0; i < dim_; ++i) out[i] = factor * x[i];
    return out;
}

Eigen::Vector3d ManufacturedSolution::displacement(const Point& x, double t) const {
    return amp_ * std::sin(omega_ * t) * spatial(x);
}

Eigen::Vector3d ManufacturedSolution::velocity(const Point& x, double t) const {
    return amp_ * omega_ * std::cos(omega_ * t) * spatial(x);
}

Eigen::Vector3d ManufacturedSolution::acceleration(const Point& x, double t) const {
    return -amp_ * omega_ * omega_ * std::sin(omega_ * t) * spatial(x);
}

Eigen::MatrixXd ManufacturedSolution::strain_exact(const Point& x, double t) const {
    return amp_ * std::sin(omega_ * t) * spatial_strain(x);
}

Eigen::Vector3d ManufacturedSolution::div_stress(const Point& x, double t) const {
    return amp_ * std::sin(omega_ * t) * spatial_div_stress(x);
}

Eigen::Vector3d ManufacturedSolution::traction(const Point& x, const Eigen::Vector3d& nu,
                                               double t) const {
    const Eigen::MatrixXd e = strain_exact(x, t);
    const double tr = e.trace();
    Eigen::Vector3d h = Eigen::Vector3d::Zero();
    for (int i = 0; i < dim_; ++i) {
        h[i] = lambda_ * tr * nu[i];
        for (int j = 0; j < dim_; ++j) h[i] += 2.0 * mu_ * e(i, j) * nu[j];
    }
    return h;
}

Eigen::Vector3d ManufacturedSolution::forcing(const Point& x, double t,
                                              const DampingField& damping,
                                              const NonlinearityParams& nl) const {
    Eigen::Vector3d g = acceleration(x, t) - div_stress(x, t) +
                        damping.eval(x) * velocity(x, t);
    if (nl.enabled) {
        const Eigen::Vector3d u = displacement(x, t);
        for (int c = 0; c < dim_; ++c)
            if (u[c] != 0.0) g[c] += std::pow(std::abs(u[c]), nl.p[c] - 1.0) * u[c];
    }
    return g;
}

ExternalForcing ManufacturedSolution::make_forcing(const Mesh& mesh,
                                                   const AssembledSystem& sys,
                                                   const DampingField& damping,
                                                   const NonlinearityParams& nl) const {
    ExternalForcing f;
    f.add_accel = [this, &mesh, &sys, &damping, &nl](double t, Eigen::VectorXd& accel) {
        const int d = dim_;
        for (int i = 0; i < mesh.n_nodes(); ++i) {
            const Eigen::Vector3d g = forcing(mesh.nodes[i], t, damping, nl);
            for (int c = 0; c < d; ++c) accel[i * d + c] += g[c];
        }
        const Eigen::VectorXd ft = traction_nodal_force(
            mesh, [this, t](const Point& x, const Eigen::Vector3d& nu) -> Eigen::Vector3d {
                return traction(x, nu, t);
            });
        for (int i = 0; i < mesh.n_nodes(); ++i) {
            const double mi = 1.0 / sys.lumped_mass[i];
            for (int c = 0; c < d; ++c) accel[i * d + c] += mi * ft[i * d + c];
        }
    };
    f.set_dirichlet = [this, &mesh, &sys](double t_u, double t_v, Eigen::VectorXd& u,
                                          Eigen::VectorXd& v) {
        const int d = dim_;
        for (int i : sys.dirichlet_nodes) {
            const Eigen::Vector3d ue = displacement(mesh.nodes[i], t_u);
            const Eigen::Vector3d ve = velocity(mesh.nodes[i], t_v);
            for (int c = 0; c < d; ++c) {
                u[i * d + c] = ue[c];
                v[i * d + c] = ve[c];
            }
        }
    };
    return f;
}

double ManufacturedSolution::l2_error(const Mesh& mesh, const AssembledSystem& sys,
                                      const Eigen::VectorXd& u, double t) const {
    double s = 0;
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        const Eigen::Vector3d ue = displacement(mesh.nodes[i], t);
        for (int c = 0; c < dim_; ++c) {
            const double e = u[i * dim_ + c] - ue[c];
            s += sys.lumped_mass[i] * e * e;
        }
    }
    return std::sqrt(s);
}

void ManufacturedSolution::initial_fields(const Mesh& mesh, Eigen::VectorXd& u0,
                                          Eigen::VectorXd& v0) const {
    const int d = dim_;
    u0 = Eigen::VectorXd::Zero(mesh.n_nodes() * d);
    v0 = Eigen::VectorXd::Zero(mesh.n_nodes() * d);
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        const Eigen::Vector3d ue = displacement(mesh.nodes[i], 0.0);
        const Eigen::Vector3d ve = velocity(mesh.nodes[i], 0.0);
        for (int c = 0; c < d; ++c) {
            u0[i * d + c] = ue[c];
            v0[i * d + c] = ve[c];
        }
    }
}

} // namespace ewdecay
