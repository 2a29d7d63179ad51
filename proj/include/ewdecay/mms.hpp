#pragma once

// Manufactured solutions for verifying the discretization. The exact field
// u*(x, t) is substituted into the governing equation to produce a volume
// forcing, an inhomogeneous clamped-boundary lift, and a free-boundary
// traction, all applied through the ExternalForcing hooks. Isotropic
// constant moduli only; that is enough to exercise every term of the
// scheme (stiffness, damping, nonlinearity, both boundary conditions).
//
// Kinds:
//   linear  -  u*(x,t) = A sin(omega t) (B x + c), divergence-free stress
//              (P1 is exact in space; the error isolates the time scheme)
//   radial  -  u*(x,t) = A sin(omega t) g(r) x/r with g a sine profile

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "ewdecay/dynamics.hpp"
#include "ewdecay/fem.hpp"

namespace ewdecay {

class ManufacturedSolution {
public:
    ManufacturedSolution(std::string kind, int dim, double lambda, double mu,
                         double omega, double amplitude, double R0, double R1);

    Eigen::Vector3d displacement(const Point& x, double t) const;
    Eigen::Vector3d velocity(const Point& x, double t) const;
    Eigen::Vector3d acceleration(const Point& x, double t) const;
    Eigen::MatrixXd strain_exact(const Point& x, double t) const;   // dim x dim
    Eigen::Vector3d div_stress(const Point& x, double t) const;
    Eigen::Vector3d traction(const Point& x, const Eigen::Vector3d& nu, double t) const;

    // g = u*_tt - div sigma(u*) + a(x) u*_t + f(u*)
    Eigen::Vector3d forcing(const Point& x, double t, const DampingField& damping,
                            const NonlinearityParams& nl) const;

    // Hooks for the simulator. The returned object keeps references to all
    // arguments; keep them alive for the duration of the run.
    ExternalForcing make_forcing(const Mesh& mesh, const AssembledSystem& sys,
                                 const DampingField& damping,
                                 const NonlinearityParams& nl) const;

    // Nodal L2 error |u_h - u*|_{L2(Omega)} at time t (lumped quadrature).
    double l2_error(const Mesh& mesh, const AssembledSystem& sys,
                    const Eigen::VectorXd& u, double t) const;

    void initial_fields(const Mesh& mesh, Eigen::VectorXd& u0, Eigen::VectorXd& v0) const;

private:
    std::string kind_;
    int dim_;
    double lambda_, mu_, omega_, amp_, R0_, R1_, k_;
    Eigen::Matrix3d B_; // linear kind gradient
    Eigen::Vector3d c_;

    double g(double r) const;
    double gp(double r) const;
    double gpp(double r) const;
    Eigen::Vector3d spatial(const Point& x) const;       // time-independent shape
    Eigen::MatrixXd spatial_strain(const Point& x) const;
    Eigen::Vector3d spatial_div_stress(const Point& x) const;
};

} // namespace ewdecay
