#include <doctest.h>

#include <random>
#include <sstream>

#include "ewdecay/fem.hpp"

using namespace ewdecay;

namespace {

// Single reference triangle (0,0)-(1,0)-(0,1) with both boundary edges needed
// for a valid mesh omitted: finalize() only validates facets we declare.
Mesh reference_triangle() {
    Mesh m;
    m.dim = 2;
    m.nodes = {Point(0, 0, 0), Point(1, 0, 0), Point(0, 1, 0)};
    m.elems = {{0, 1, 2, -1}};
    m.finalize();
    return m;
}

Eigen::VectorXd nodal_field(const Mesh& m,
                            const std::function<Eigen::Vector3d(const Point&)>& f) {
    Eigen::VectorXd u(m.n_nodes() * m.dim);
    for (int i = 0; i < m.n_nodes(); ++i) {
        const Eigen::Vector3d v = f(m.nodes[i]);
        for (int c = 0; c < m.dim; ++c) u[i * m.dim + c] = v[c];
    }
    return u;
}

NonlinearityParams no_nl() { return {}; }

} // namespace

TEST_CASE("strain of elementary displacement fields") {
    const Mesh m = reference_triangle();

    SUBCASE("constant field has zero strain") {
        const Eigen::VectorXd u =
            nodal_field(m, [](const Point&) { return Eigen::Vector3d(0.7, -0.3, 0); });
        CHECK(strain(m, 0, u).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("identity map has identity strain") {
        const Eigen::VectorXd u = nodal_field(m, [](const Point& x) {
            return Eigen::Vector3d(x[0], x[1], 0);
        });
        CHECK((strain(m, 0, u) - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <
              1e-14);
    }
    SUBCASE("rotation generator has zero strain") {
        const Eigen::VectorXd u = nodal_field(m, [](const Point& x) {
            return Eigen::Vector3d(x[1], -x[0], 0);
        });
        CHECK(strain(m, 0, u).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("stress of isotropic tensors") {
    const Rank4 a = Rank4::isotropic(3, 1.0, 1.0);

    SUBCASE("zero strain gives zero stress") {
        CHECK(stress(a, Eigen::MatrixXd::Zero(3, 3)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("identity strain gives (n lambda + 2 mu) I") {
        const Eigen::MatrixXd s = stress(a, Eigen::MatrixXd::Identity(3, 3));
        CHECK((s - 5.0 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("general strain matches lambda tr(eps) I + 2 mu eps") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> unif(-1, 1);
        Eigen::MatrixXd eps(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) eps(i, j) = eps(j, i) = unif(rng);
        const Eigen::MatrixXd expect =
            eps.trace() * Eigen::MatrixXd::Identity(3, 3) + 2.0 * eps;
        CHECK((stress(a, eps) - expect).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("element stiffness matches the hand-computed oracle") {
    // P1 triangle (0,0),(1,0),(0,1), lambda = 0, mu = 1/2:
    // block(A,B)_ij = 1/4 [ delta_ij gA.gB + gA_j gB_i ] with
    // g1 = (-1,-1), g2 = (1,0), g3 = (0,1)  (area 1/2 folded in).
    const Mesh m = reference_triangle();
    auto field = ElasticityTensorField::lame(2, RadialProfile::constant(0.0),
                                             RadialProfile::constant(0.5));
    const AssembledSystem sys = assemble(m, field, DampingField::none(m));
    Eigen::MatrixXd K = Eigen::MatrixXd(sys.stiffness);

    Eigen::MatrixXd expect(6, 6);
    expect << 0.75, 0.25, -0.5, -0.25, -0.25, 0.0,    //
        0.25, 0.75, 0.0, -0.25, -0.25, -0.5,          //
        -0.5, 0.0, 0.5, 0.0, 0.0, 0.0,                //
        -0.25, -0.25, 0.0, 0.25, 0.25, 0.0,           //
        -0.25, -0.25, 0.0, 0.25, 0.25, 0.0,           //
        0.0, -0.5, 0.0, 0.0, 0.0, 0.5;
    CHECK((K - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("stiffness annihilates rigid motions when unconstrained") {
    const Mesh m = gen_annulus_mesh(1.0, 2.0, 3, 16);
    auto field = ElasticityTensorField::lame(2, RadialProfile::constant(1.0),
                                             RadialProfile::constant(1.0));
    const AssembledSystem sys = assemble(m, field, DampingField::none(m));
    const double knorm = Eigen::MatrixXd(sys.stiffness).norm();

    const Eigen::VectorXd tx =
        nodal_field(m, [](const Point&) { return Eigen::Vector3d(1, 0, 0); });
    const Eigen::VectorXd ty =
        nodal_field(m, [](const Point&) { return Eigen::Vector3d(0, 1, 0); });
    const Eigen::VectorXd rot = nodal_field(m, [](const Point& x) {
        return Eigen::Vector3d(x[1], -x[0], 0);
    });
    for (const auto& u : {tx, ty, rot})
        CHECK((sys.stiffness * u).norm() <= 1e-10 * knorm * u.norm());
}

TEST_CASE("stiffness is symmetric and positive semidefinite") {
    const Mesh m = gen_annulus_mesh(1.0, 2.0, 2, 12);
    auto field = ElasticityTensorField::lame(2, RadialProfile::constant(1.0),
                                             RadialProfile::quadratic(1.0, 0.25));
    const AssembledSystem sys = assemble(m, field, DampingField::none(m));
    const Eigen::MatrixXd K = Eigen::MatrixXd(sys.stiffness);
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * K.cwiseAbs().maxCoeff());

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unif(-1, 1);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd u(sys.ndof());
        for (int i = 0; i < u.size(); ++i) u[i] = unif(rng);
        CHECK(u.dot(K * u) >= -1e-12 * u.squaredNorm() * K.norm());
    }
}

TEST_CASE("clamping the inner boundary removes the null space") {
    // Discrete Korn: smallest eigenvalue of the constrained stiffness is
    // strictly positive (inverse power iteration on a tiny mesh).
    const Mesh m = gen_annulus_mesh(1.0, 2.0, 2, 8);
    auto field = ElasticityTensorField::lame(2, RadialProfile::constant(1.0),
                                             RadialProfile::constant(1.0));
    const AssembledSystem sys = assemble(m, field, DampingField::none(m));

    std::vector<int> free_dofs;
    std::vector<bool> clamped(sys.n_nodes, false);
    for (int i : sys.dirichlet_nodes) clamped[i] = true;
    for (int i = 0; i < sys.n_nodes; ++i)
        if (!clamped[i])
            for (int c = 0; c < 2; ++c) free_dofs.push_back(i * 2 + c);

    const Eigen::MatrixXd K = Eigen::MatrixXd(sys.stiffness);
    Eigen::MatrixXd Kc(free_dofs.size(), free_dofs.size());
    for (std::size_t a = 0; a < free_dofs.size(); ++a)
        for (std::size_t b = 0; b < free_dofs.size(); ++b)
            Kc(a, b) = K(free_dofs[a], free_dofs[b]);

    Eigen::LDLT<Eigen::MatrixXd> solver(Kc);
    REQUIRE(solver.info() == Eigen::Success);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(Kc.rows()).normalized();
    double lambda_min = 0;
    for (int it = 0; it < 200; ++it) {
        x = solver.solve(x);
        x.normalize();
        lambda_min = x.dot(Kc * x);
    }
    CHECK(lambda_min > 1e-6);

    // Cross-check with a dense eigensolve.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Kc);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK(lambda_min == doctest::Approx(es.eigenvalues().minCoeff()).epsilon(5e-2));
}

TEST_CASE("lumped mass preserves the total measure") {
    const Mesh m = gen_annulus_mesh(1.0, 2.0, 3, 24);
    auto field = ElasticityTensorField::lame(2, RadialProfile::constant(1.0),
                                             RadialProfile::constant(1.0));
    const AssembledSystem sys = assemble(m, field, DampingField::none(m));
    CHECK(sys.lumped_mass.sum() == doctest::Approx(m.total_measure()).epsilon(1e-12));
    for (int i = 0; i < sys.n_nodes; ++i) CHECK(sys.lumped_mass[i] > 0.0);
}

TEST_CASE("damping mass is the nodal mass times the coefficient") {
    const Mesh m = gen_annulus_mesh(1.0, 2.0, 4, 16);
    auto field = ElasticityTensorField::lame(2, RadialProfile::constant(1.0),
                                             RadialProfile::constant(1.0));
    const DampingField a = DampingField::bump(m, 1.5, 5.0, 0.2);
    const AssembledSystem sys = assemble(m, field, a);
    for (int i = 0; i < sys.n_nodes; ++i) {
        CHECK(sys.damping_mass[i] ==
              doctest::Approx(sys.lumped_mass[i] * a.nodal[i]).epsilon(1e-14));
        CHECK(sys.damping_mass[i] >= 0.0);
    }
}

TEST_CASE("assembly aborts when ellipticity fails at a quadrature point") {
    const Mesh m = gen_annulus_mesh(1.0, 2.0, 2, 8);
    auto field = ElasticityTensorField::lame(2, RadialProfile::constant(1.0),
                                             RadialProfile::constant(-1.0));
    CHECK_THROWS_AS(assemble(m, field, DampingField::none(m)), AssemblyError);
}

TEST_CASE("energy quadrature examples") {
    const Mesh m = gen_annulus_mesh(1.0, 2.0, 4, 32);
    auto field = ElasticityTensorField::lame(2, RadialProfile::constant(1.0),
                                             RadialProfile::constant(1.0));
    const AssembledSystem sys = assemble(m, field, DampingField::none(m));
    const double vol = m.total_measure();

    SUBCASE("zero fields have zero energy") {
        const Eigen::VectorXd z = Eigen::VectorXd::Zero(sys.ndof());
        const EnergyParts e = energy_quadrature(sys, z, z, no_nl());
        CHECK(e.total() == 0.0);
    }
    SUBCASE("unit velocity gives n |Omega| / 2") {
        const Eigen::VectorXd z = Eigen::VectorXd::Zero(sys.ndof());
        const Eigen::VectorXd v = Eigen::VectorXd::Ones(sys.ndof());
        const EnergyParts e = energy_quadrature(sys, z, v, no_nl());
        CHECK(e.kinetic == doctest::Approx(0.5 * 2.0 * vol).epsilon(1e-12));
    }
    SUBCASE("identity map strain energy is (lambda n^2 + 2 mu n) |Omega| / 2") {
        Eigen::VectorXd u(sys.ndof()), z = Eigen::VectorXd::Zero(sys.ndof());
        for (int i = 0; i < m.n_nodes(); ++i)
            for (int c = 0; c < 2; ++c) u[i * 2 + c] = m.nodes[i][c];
        const EnergyParts e = energy_quadrature(sys, u, z, no_nl());
        // n = 2, lambda = mu = 1: sigma : eps = lambda n^2 + 2 mu n = 8
        CHECK(e.strain == doctest::Approx(0.5 * 8.0 * vol).epsilon(1e-12));
    }
    SUBCASE("matrix and element-loop strain energies agree") {
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> unif(-1, 1);
        Eigen::VectorXd u(sys.ndof());
        for (int i = 0; i < u.size(); ++i) u[i] = unif(rng);
        const Eigen::VectorXd z = Eigen::VectorXd::Zero(sys.ndof());
        const double e_mat = energy_quadrature(sys, u, z, no_nl()).strain;
        const double e_loop = element_strain_energy(m, field, u);
        CHECK(e_mat == doctest::Approx(e_loop).epsilon(1e-12));
    }
    SUBCASE("nodal potential quadrature") {
        NonlinearityParams nl;
        nl.enabled = true;
        nl.p = Eigen::VectorXd::Constant(2, 3.0);
        const Eigen::VectorXd u = Eigen::VectorXd::Ones(sys.ndof());
        const Eigen::VectorXd z = Eigen::VectorXd::Zero(sys.ndof());
        const EnergyParts e = energy_quadrature(sys, u, z, nl);
        // per node and component: m_i |1|^4 / 4; total = 2 |Omega| / 4
        CHECK(e.potential == doctest::Approx(2.0 * vol / 4.0).epsilon(1e-12));
    }
}

TEST_CASE("traction force assembles the facet midpoint rule") {
    const Mesh m = gen_annulus_mesh(1.0, 2.0, 2, 16);
    // Unit outward normal load on the free boundary: total force ~ 0 by
    // symmetry, total magnitude = boundary length.
    const Eigen::VectorXd f = traction_nodal_force(
        m, [](const Point&, const Eigen::Vector3d& nu) -> Eigen::Vector3d { return nu; });
    double fx = 0, fy = 0;
    for (int i = 0; i < m.n_nodes(); ++i) {
        fx += f[i * 2];
        fy += f[i * 2 + 1];
    }
    CHECK(std::abs(fx) < 1e-12);
    CHECK(std::abs(fy) < 1e-12);
    // Radial resultant integrates |Gamma_1| against the outward normal, up
    // to the node-vs-facet normal misalignment cos(pi / n_theta).
    double radial = 0;
    for (int i = 0; i < m.n_nodes(); ++i) {
        const Point& x = m.nodes[i];
        radial += (f[i * 2] * x[0] + f[i * 2 + 1] * x[1]) / x.norm();
    }
    CHECK(radial == doctest::Approx(m.boundary_measure(kGamma1) * std::cos(M_PI / 16))
                        .epsilon(1e-12));
}

TEST_CASE("stiffness export uses coordinate format") {
    const Mesh m = reference_triangle();
    auto field = ElasticityTensorField::lame(2, RadialProfile::constant(0.0),
                                             RadialProfile::constant(0.5));
    const AssembledSystem sys = assemble(m, field, DampingField::none(m));
    std::ostringstream os;
    export_stiffness(sys, os);
    int rows = 0;
    std::istringstream is(os.str());
    std::string line;
    while (std::getline(is, line)) {
        int r, c;
        double v;
        std::istringstream ls(line);
        REQUIRE((ls >> r >> c >> v));
        ++rows;
    }
    CHECK(rows == 36);
}
