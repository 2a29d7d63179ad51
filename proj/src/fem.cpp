#include "ewdecay/fem.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

namespace ewdecay {

namespace {

// Gradients of the P1 barycentric basis on element e; rows are basis
// functions, columns spatial directions.
Eigen::MatrixXd basis_gradients(const Mesh& mesh, int e) {
    const int d = mesh.dim;
    const auto& el = mesh.elems[e];
    Eigen::MatrixXd J(d, d);
    for (int k = 0; k < d; ++k)
        J.col(k) = (mesh.nodes[el[k + 1]] - mesh.nodes[el[0]]).head(d);
    // Reference coordinates xi(x) = J^{-1} (x - p0); grad of basis k+1 is
    // row k of J^{-1}.
    Eigen::MatrixXd Jinv = J.inverse();
    Eigen::MatrixXd g(d + 1, d);
    g.bottomRows(d) = Jinv;
    g.row(0) = -Jinv.colwise().sum();
    return g;
}

std::string point_str(const Point& x) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "(%.6g, %.6g, %.6g)", x[0], x[1], x[2]);
    return buf;
}

} // namespace

void NonlinearityParams::validate(int dim) const {
    if (!enabled) return;
    if (p.size() != dim)
        throw ConfigError("nonlinearity: need one exponent per component");
    const double p_max =
        dim >= 3 ? (dim + 2.0) / (dim - 2.0) : std::numeric_limits<double>::infinity();
    for (int c = 0; c < dim; ++c) {
        if (!(p[c] > 1.0))
            throw ConfigError("nonlinearity: exponents must satisfy p > 1");
        if (p[c] > p_max)
            throw ConfigError("nonlinearity: exponent exceeds the critical power (dim+2)/(dim-2)");
    }
}

void AssembledSystem::project_dirichlet(Eigen::VectorXd& w) const {
    for (int i : dirichlet_nodes)
        for (int c = 0; c < dim; ++c) w[i * dim + c] = 0.0;
}

Eigen::MatrixXd displacement_gradient(const Mesh& mesh, int e, const Eigen::VectorXd& u) {
    const int d = mesh.dim;
    if (mesh.elem_measure(e) <= 0.0) throw AssemblyError("gradient: degenerate element");
    const Eigen::MatrixXd g = basis_gradients(mesh, e);
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(d, d); // grad(i,m) = du_i/dx_m
    const auto& el = mesh.elems[e];
    for (int k = 0; k <= d; ++k)
        for (int i = 0; i < d; ++i) grad.row(i) += u[el[k] * d + i] * g.row(k);
    return grad;
}

Eigen::MatrixXd strain(const Mesh& mesh, int e, const Eigen::VectorXd& u) {
    const Eigen::MatrixXd grad = displacement_gradient(mesh, e, u);
    return 0.5 * (grad + grad.transpose());
}

Eigen::MatrixXd stress(const Rank4& a, const Eigen::MatrixXd& eps) {
    const int d = a.dim();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double v = 0;
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) v += a(i, j, k, l) * eps(k, l);
            s(i, j) = v;
        }
    return s;
}

AssembledSystem assemble(const Mesh& mesh, const ElasticityTensorField& field,
                         const DampingField& damping) {
    const int d = mesh.dim;
    if (field.dim() != d) throw AssemblyError("assemble: tensor/mesh dimension mismatch");

    AssembledSystem sys;
    sys.dim = d;
    sys.n_nodes = mesh.n_nodes();
    sys.lumped_mass = Eigen::VectorXd::Zero(sys.n_nodes);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh.n_elems()) * (d + 1) * (d + 1) * d * d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;

    for (int e = 0; e < mesh.n_elems(); ++e) {
        const double vol = mesh.elem_measure(e);
        if (vol <= 0.0) throw AssemblyError("assemble: degenerate element");
        const Point c = mesh.elem_centroid(e);
        const Rank4 a = field.eval(c);
        es.compute(voigt_matrix(a), Eigen::EigenvaluesOnly);
        if (!(es.eigenvalues().minCoeff() > 0.0))
            throw AssemblyError("assemble: tensor not elliptic at quadrature point " +
                                point_str(c));

        const Eigen::MatrixXd g = basis_gradients(mesh, e);
        const auto& el = mesh.elems[e];
        // Block (A,i),(B,j) = vol * sum_{q,s} a_iqjs gA_q gB_s (minor symmetry
        // folds the strain symmetrization).
        for (int A = 0; A <= d; ++A)
            for (int B = 0; B <= d; ++B)
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) {
                        double v = 0;
                        for (int q = 0; q < d; ++q)
                            for (int s = 0; s < d; ++s)
                                v += a(i, q, j, s) * g(A, q) * g(B, s);
                        trip.emplace_back(el[A] * d + i, el[B] * d + j, vol * v);
                    }
        for (int A = 0; A <= d; ++A) sys.lumped_mass[el[A]] += vol / (d + 1);
    }

    sys.stiffness.resize(sys.ndof(), sys.ndof());
    sys.stiffness.setFromTriplets(trip.begin(), trip.end());
    sys.stiffness.makeCompressed();

    sys.damping_mass = Eigen::VectorXd::Zero(sys.n_nodes);
    for (int i = 0; i < sys.n_nodes; ++i)
        sys.damping_mass[i] =
            sys.lumped_mass[i] *
            (damping.nodal.empty() ? damping.eval(mesh.nodes[i]) : damping.nodal[i]);

    std::set<int> dir;
    for (const auto& f : mesh.facets)
        if (f.tag == kGamma0)
            for (int k = 0; k < d; ++k) dir.insert(f.nodes[k]);
    sys.dirichlet_nodes.assign(dir.begin(), dir.end());
    return sys;
}

EnergyParts energy_quadrature(const AssembledSystem& sys, const Eigen::VectorXd& u,
                              const Eigen::VectorXd& v, const NonlinearityParams& nl) {
    EnergyParts out;
    const int d = sys.dim;
    for (int i = 0; i < sys.n_nodes; ++i)
        for (int c = 0; c < d; ++c) {
            const double vi = v[i * d + c];
            out.kinetic += 0.5 * sys.lumped_mass[i] * vi * vi;
        }
    out.strain = 0.5 * u.dot(sys.stiffness * u);
    if (nl.enabled)
        for (int i = 0; i < sys.n_nodes; ++i)
            for (int c = 0; c < d; ++c)
                out.potential += sys.lumped_mass[i] *
                                 std::pow(std::abs(u[i * d + c]), nl.p[c] + 1.0) /
                                 (nl.p[c] + 1.0);
    return out;
}

double element_strain_energy(const Mesh& mesh, const ElasticityTensorField& field,
                             const Eigen::VectorXd& u) {
    double s = 0;
    for (int e = 0; e < mesh.n_elems(); ++e) {
        const Eigen::MatrixXd eps = strain(mesh, e, u);
        const Rank4 a = field.eval(mesh.elem_centroid(e));
        s += 0.5 * mesh.elem_measure(e) * contract(a, eps, eps);
    }
    return s;
}

Eigen::VectorXd traction_nodal_force(
    const Mesh& mesh,
    const std::function<Eigen::Vector3d(const Point&, const Eigen::Vector3d&)>& h) {
    const int d = mesh.dim;
    Eigen::VectorXd force = Eigen::VectorXd::Zero(mesh.n_nodes() * d);
    for (const auto& f : mesh.facets) {
        if (f.tag != kGamma1) continue;
        const Eigen::Vector3d hv = h(mesh.facet_centroid(f), f.normal);
        const double w = f.measure / d; // equal split of the midpoint-rule load
        for (int k = 0; k < d; ++k)
            for (int c = 0; c < d; ++c) force[f.nodes[k] * d + c] += w * hv[c];
    }
    return force;
}

void export_stiffness(const AssembledSystem& sys, std::ostream& out) {
    char buf[64];
    for (int k = 0; k < sys.stiffness.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.stiffness, k); it; ++it) {
            std::snprintf(buf, sizeof(buf), "%.17g", it.value());
            out << it.row() << ' ' << it.col() << ' ' << buf << '\n';
        }
}

} // namespace ewdecay
