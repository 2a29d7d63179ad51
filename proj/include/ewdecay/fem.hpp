#pragma once

// P1 spatial discretization of the damped semilinear elastic wave system:
// constant-per-element strain/stress, one-point-quadrature stiffness,
// row-sum lumped mass, nodal damping mass, clamped boundary by projection.
// The traction-free boundary condition is natural and contributes nothing.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <iosfwd>
#include <vector>

#include "ewdecay/geometry.hpp"
#include "ewdecay/tensor.hpp"

namespace ewdecay {

// Componentwise power-law zero-order term f_i(u) = |u_i|^{p_i - 1} u_i.
struct NonlinearityParams {
    bool enabled = false;
    Eigen::VectorXd p; // one exponent per displacement component

    // 1 < p_i, and p_i <= (dim + 2) / (dim - 2) when dim >= 3. In 2D any
    // p_i > 1 is accepted; callers flag such runs as outside the regime
    // the decay theory covers.
    void validate(int dim) const;
};

struct AssembledSystem {
    int dim = 2;
    int n_nodes = 0;
    Eigen::VectorXd lumped_mass;            // per node, shared by components
    Eigen::VectorXd damping_mass;           // per node: m_i * a(x_i)
    Eigen::SparseMatrix<double> stiffness;  // ndof x ndof, node-major dofs
    std::vector<int> dirichlet_nodes;       // clamped (tag 0) nodes

    int ndof() const { return dim * n_nodes; }
    void project_dirichlet(Eigen::VectorXd& w) const; // zero clamped components
};

// Constant strain of the P1 interpolant on element e.
Eigen::MatrixXd strain(const Mesh& mesh, int e, const Eigen::VectorXd& u);

// Constant displacement gradient on element e; entry (i, m) is du_i/dx_m.
Eigen::MatrixXd displacement_gradient(const Mesh& mesh, int e, const Eigen::VectorXd& u);

// sigma = a : eps
Eigen::MatrixXd stress(const Rank4& a, const Eigen::MatrixXd& eps);

// Stiffness from the centroid-sampled tensor (exact for P1), lumped mass,
// nodal damping mass. Throws AssemblyError if the tensor loses ellipticity
// at an element centroid, naming the point.
AssembledSystem assemble(const Mesh& mesh, const ElasticityTensorField& field,
                         const DampingField& damping);

struct EnergyParts {
    double kinetic = 0;
    double strain = 0;
    double potential = 0;
    double total() const { return kinetic + strain + potential; }
};

// kinetic = 1/2 v' M v, strain = 1/2 u' K u,
// potential = sum_i m_i sum_c |u_ic|^{p_c+1} / (p_c + 1)  (nodal quadrature).
EnergyParts energy_quadrature(const AssembledSystem& sys, const Eigen::VectorXd& u,
                              const Eigen::VectorXd& v, const NonlinearityParams& nl);

// Independent element-loop evaluation of 1/2 int sigma : eps, for
// cross-checking the matrix path.
double element_strain_energy(const Mesh& mesh, const ElasticityTensorField& field,
                             const Eigen::VectorXd& u);

// Nodal force vector of a traction h(centroid, outward normal) applied on
// the tag-1 boundary, facet-midpoint rule.
Eigen::VectorXd traction_nodal_force(
    const Mesh& mesh,
    const std::function<Eigen::Vector3d(const Point&, const Eigen::Vector3d&)>& h);

// Coordinate-format dump of the stiffness matrix ("row col value" lines).
void export_stiffness(const AssembledSystem& sys, std::ostream& out);

} // namespace ewdecay
