#pragma once

// Spatially varying rank-4 elasticity tensor fields a_ijkl(x) with the
// usual minor/major symmetries, their Voigt reduction, and the algebraic
// checks the solver depends on: two-sided ellipticity bounds and the
// radial growth condition
//
//     (1 - delta) a(x) - (r/2) da/dr(x)  positive semidefinite
//
// on symmetric strains, whose largest admissible delta controls the
// damping-based energy decay.

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

#include "ewdecay/errors.hpp"

namespace ewdecay {

using Point = Eigen::Vector3d; // z = 0 in 2D

// Dense rank-4 tensor over R^dim, dim = 2 or 3. Plain storage; the
// symmetry constraints are checked where they matter (Voigt reduction).
class Rank4 {
public:
    explicit Rank4(int dim) : dim_(dim) { a_.fill(0.0); }

    int dim() const { return dim_; }

    double& operator()(int i, int j, int k, int l) {
        return a_[((i * dim_ + j) * dim_ + k) * dim_ + l];
    }
    double operator()(int i, int j, int k, int l) const {
        return a_[((i * dim_ + j) * dim_ + k) * dim_ + l];
    }

    Rank4& operator+=(const Rank4& o);
    Rank4& operator-=(const Rank4& o);
    Rank4& operator*=(double s);

    double max_abs() const;

    static Rank4 zero(int dim) { return Rank4(dim); }
    // lambda * delta_ij delta_kl + mu * (delta_ik delta_jl + delta_il delta_jk)
    static Rank4 isotropic(int dim, double lambda, double mu);

private:
    int dim_;
    std::array<double, 81> a_;
};

// Number of independent symmetric-matrix components, m = dim (dim + 1) / 2.
int voigt_size(int dim);

// Voigt reduction with sqrt(2)-weighted shear rows/columns so that
// |voigt_vector(eps)|^2 = sum_ij eps_ij^2 and the eigenvalues of
// voigt_matrix(a) are exactly the extrema of the quadratic form
// sum a_ijkl eps_ij eps_kl over unit-norm symmetric eps.
// Throws SymmetryViolation if `a` lacks the minor/major symmetries.
Eigen::MatrixXd voigt_matrix(const Rank4& a, double sym_tol = 1e-12);
Eigen::VectorXd voigt_vector(const Eigen::MatrixXd& eps);

// sum_ijkl a_ijkl e1_ij e2_kl  (direct 4-index contraction)
double contract(const Rank4& a, const Eigen::MatrixXd& e1, const Eigen::MatrixXd& e2);

// Scalar radial profile f(r) with optional analytic derivative.
struct RadialProfile {
    std::function<double(double)> value;
    std::function<double(double)> deriv; // null -> no analytic derivative

    static RadialProfile constant(double c);
    static RadialProfile quadratic(double c0, double eps); // c0 (1 + eps r^2)
    static RadialProfile exponential(double c0, double s); // c0 exp(s r)
};

// Elasticity tensor field. Three kinds:
//   Constant    - one tensor everywhere
//   Lame        - a_ijkl(x) = lambda(r) d_ij d_kl + mu(r)(d_ik d_jl + d_il d_jk)
//   UserSampled - arbitrary callback; radial derivatives by finite differences
class ElasticityTensorField {
public:
    enum class Kind { Constant, Lame, UserSampled };

    static ElasticityTensorField constant(int dim, const Rank4& a);
    static ElasticityTensorField lame(int dim, RadialProfile lambda, RadialProfile mu);
    static ElasticityTensorField user(int dim, std::function<Rank4(const Point&)> f);

    int dim() const { return dim_; }
    Kind kind() const { return kind_; }

    Rank4 eval(const Point& x) const;

    bool has_analytic_radial() const;
    // da/dr along the unit radial direction; only valid when
    // has_analytic_radial() is true.
    Rank4 analytic_radial_derivative(const Point& x) const;

    // Lame profile access (valid for Kind::Lame), used by manufactured
    // solutions and the construction-time bound check.
    double lambda_at(double r) const { return lambda_.value(r); }
    double mu_at(double r) const { return mu_.value(r); }

private:
    int dim_ = 3;
    Kind kind_ = Kind::Constant;
    Rank4 const_a_{3};
    RadialProfile lambda_, mu_;
    std::function<Rank4(const Point&)> user_fn_;
};

// Builds a Lame-kind field and checks the pointwise bounds
// mu > 0 and lambda + 2 mu > 0 at every sample; throws ConfigError
// naming the first failing point.
ElasticityTensorField lame_tensor(int dim, RadialProfile lambda, RadialProfile mu,
                                  const std::vector<Point>& samples);

struct EllipticityBounds {
    double alpha = 0;   // min over samples of the smallest Voigt eigenvalue
    double beta = 0;    // max over samples of the largest
    Point argmin = Point::Zero();
    Point argmax = Point::Zero();
    bool elliptic() const { return alpha > 0.0; }
};

EllipticityBounds ellipticity_bounds(const ElasticityTensorField& field,
                                     const std::vector<Point>& samples);

// Central finite difference of a(x) along x/|x| with step h, overridden by
// the analytic derivative for Constant/Lame kinds. Requires |x| > h.
Rank4 radial_derivative(const ElasticityTensorField& field, const Point& x, double h);

// min over samples of the smallest Voigt eigenvalue of
// (1 - delta) a(x) - (r/2) da/dr(x). Nonincreasing in delta.
double radial_margin(const ElasticityTensorField& field, double delta,
                     const std::vector<Point>& samples, double fd_step,
                     Point* worst_point = nullptr);

struct RadialConditionResult {
    bool holds = false;   // margin(delta_lo) >= 0 for delta_lo = 1e-6
    double delta_max = 0; // largest admissible delta in (0, cap], 0 if !holds
    double margin = 0;    // margin at delta_max
    Point worst_point = Point::Zero();
};

// Bisection for the largest delta in (0, cap] with nonnegative margin,
// to absolute tolerance tol. cap defaults to 1; a cap of 2 is offered for
// radially decreasing media (config flag).
RadialConditionResult max_delta(const ElasticityTensorField& field,
                                const std::vector<Point>& samples, double tol,
                                double cap = 1.0, double fd_step = 1e-4);

// Wave-equation analog on n x n symmetric matrix fields A(x):
// margin of (1 - delta) A - (r/2) dA/dr over samples.
struct MatrixField {
    int dim = 3;
    std::function<Eigen::MatrixXd(const Point&)> eval;
    std::function<Eigen::MatrixXd(const Point&)> radial_deriv; // null -> FD
};

double matrix_radial_margin(const MatrixField& field, double delta,
                            const std::vector<Point>& samples, double fd_step,
                            Point* worst_point = nullptr);

} // namespace ewdecay
