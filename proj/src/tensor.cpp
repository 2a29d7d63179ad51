#include "ewdecay/tensor.hpp"

#include <cmath>
#include <cstdio>

namespace ewdecay {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Voigt index pairs per dimension, normal components first.
const std::array<std::pair<int, int>, 3> kPairs2d = {{{0, 0}, {1, 1}, {0, 1}}};
const std::array<std::pair<int, int>, 6> kPairs3d = {
    {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}}};

std::pair<int, int> voigt_pair(int dim, int a) {
    return dim == 2 ? kPairs2d[a] : kPairs3d[a];
}

double voigt_weight(int dim, int a) { return a < dim ? 1.0 : kSqrt2; }

std::string point_str(const Point& x) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "(%.6g, %.6g, %.6g)", x[0], x[1], x[2]);
    return buf;
}

} // namespace

Rank4& Rank4::operator+=(const Rank4& o) {
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

Rank4& Rank4::operator-=(const Rank4& o) {
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

Rank4& Rank4::operator*=(double s) {
    for (double& v : a_) v *= s;
    return *this;
}

double Rank4::max_abs() const {
    double m = 0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
}

Rank4 Rank4::isotropic(int dim, double lambda, double mu) {
    Rank4 a(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            for (int k = 0; k < dim; ++k)
                for (int l = 0; l < dim; ++l)
                    a(i, j, k, l) = lambda * (i == j) * (k == l) +
                                    mu * ((i == k) * (j == l) + (i == l) * (j == k));
    return a;
}

int voigt_size(int dim) { return dim * (dim + 1) / 2; }

Eigen::MatrixXd voigt_matrix(const Rank4& a, double sym_tol) {
    const int n = a.dim();
    const double scale = std::max(a.max_abs(), 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    const double v = a(i, j, k, l);
                    if (std::abs(v - a(j, i, k, l)) > sym_tol * scale ||
                        std::abs(v - a(i, j, l, k)) > sym_tol * scale ||
                        std::abs(v - a(k, l, i, j)) > sym_tol * scale)
                        throw SymmetryViolation(
                            "elasticity tensor lacks the required index symmetries");
                }

    const int m = voigt_size(n);
    Eigen::MatrixXd v(m, m);
    for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) {
            auto [i, j] = voigt_pair(n, p);
            auto [k, l] = voigt_pair(n, q);
            v(p, q) = voigt_weight(n, p) * voigt_weight(n, q) * a(i, j, k, l);
        }
    return v;
}

Eigen::VectorXd voigt_vector(const Eigen::MatrixXd& eps) {
    const int n = static_cast<int>(eps.rows());
    const int m = voigt_size(n);
    Eigen::VectorXd e(m);
    for (int p = 0; p < m; ++p) {
        auto [i, j] = voigt_pair(n, p);
        e[p] = voigt_weight(n, p) * eps(i, j);
    }
    return e;
}

double contract(const Rank4& a, const Eigen::MatrixXd& e1, const Eigen::MatrixXd& e2) {
    const int n = a.dim();
    double s = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) s += a(i, j, k, l) * e1(i, j) * e2(k, l);
    return s;
}

RadialProfile RadialProfile::constant(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }};
}

RadialProfile RadialProfile::quadratic(double c0, double eps) {
    return {[c0, eps](double r) { return c0 * (1.0 + eps * r * r); },
            [c0, eps](double r) { return 2.0 * c0 * eps * r; }};
}

RadialProfile RadialProfile::exponential(double c0, double s) {
    return {[c0, s](double r) { return c0 * std::exp(s * r); },
            [c0, s](double r) { return c0 * s * std::exp(s * r); }};
}

ElasticityTensorField ElasticityTensorField::constant(int dim, const Rank4& a) {
    ElasticityTensorField f;
    f.dim_ = dim;
    f.kind_ = Kind::Constant;
    f.const_a_ = a;
    return f;
}

ElasticityTensorField ElasticityTensorField::lame(int dim, RadialProfile lambda,
                                                  RadialProfile mu) {
    ElasticityTensorField f;
    f.dim_ = dim;
    f.kind_ = Kind::Lame;
    f.lambda_ = std::move(lambda);
    f.mu_ = std::move(mu);
    return f;
}

ElasticityTensorField ElasticityTensorField::user(int dim,
                                                  std::function<Rank4(const Point&)> fn) {
    ElasticityTensorField f;
    f.dim_ = dim;
    f.kind_ = Kind::UserSampled;
    f.user_fn_ = std::move(fn);
    return f;
}

Rank4 ElasticityTensorField::eval(const Point& x) const {
    switch (kind_) {
    case Kind::Constant: return const_a_;
    case Kind::Lame: {
        const double r = x.norm();
        return Rank4::isotropic(dim_, lambda_.value(r), mu_.value(r));
    }
    case Kind::UserSampled: return user_fn_(x);
    }
    return const_a_;
}

bool ElasticityTensorField::has_analytic_radial() const {
    if (kind_ == Kind::Constant) return true;
    if (kind_ == Kind::Lame) return lambda_.deriv != nullptr && mu_.deriv != nullptr;
    return false;
}

Rank4 ElasticityTensorField::analytic_radial_derivative(const Point& x) const {
    if (kind_ == Kind::Constant) return Rank4::zero(dim_);
    const double r = x.norm();
    return Rank4::isotropic(dim_, lambda_.deriv(r), mu_.deriv(r));
}

ElasticityTensorField lame_tensor(int dim, RadialProfile lambda, RadialProfile mu,
                                  const std::vector<Point>& samples) {
    auto field = ElasticityTensorField::lame(dim, std::move(lambda), std::move(mu));
    for (const Point& x : samples) {
        const double r = x.norm();
        const double m = field.mu_at(r);
        const double p = field.lambda_at(r) + 2.0 * m;
        if (!(m > 0.0) || !(p > 0.0))
            throw ConfigError("lame moduli out of range at " + point_str(x) +
                              ": need mu > 0 and lambda + 2 mu > 0");
    }
    return field;
}

EllipticityBounds ellipticity_bounds(const ElasticityTensorField& field,
                                     const std::vector<Point>& samples) {
    if (samples.empty()) throw ConfigError("ellipticity_bounds: empty sample set");
    EllipticityBounds b;
    b.alpha = std::numeric_limits<double>::infinity();
    b.beta = -std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    for (const Point& x : samples) {
        es.compute(voigt_matrix(field.eval(x)), Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        if (lo < b.alpha) { b.alpha = lo; b.argmin = x; }
        if (hi > b.beta) { b.beta = hi; b.argmax = x; }
    }
    return b;
}

Rank4 radial_derivative(const ElasticityTensorField& field, const Point& x, double h) {
    const double r = x.norm();
    if (r <= h)
        throw ConfigError("radial_derivative: |x| <= step; the radial direction is "
                          "ill-defined near the origin");
    if (field.has_analytic_radial()) return field.analytic_radial_derivative(x);
    const Point dir = x / r;
    Rank4 d = field.eval(x + h * dir);
    d -= field.eval(x - h * dir);
    d *= 1.0 / (2.0 * h);
    return d;
}

double radial_margin(const ElasticityTensorField& field, double delta,
                     const std::vector<Point>& samples, double fd_step,
                     Point* worst_point) {
    if (samples.empty()) throw ConfigError("radial_margin: empty sample set");
    double margin = std::numeric_limits<double>::infinity();
    Point worst = samples.front();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    for (const Point& x : samples) {
        Rank4 m = field.eval(x);
        m *= (1.0 - delta);
        Rank4 d = radial_derivative(field, x, fd_step);
        d *= 0.5 * x.norm();
        m -= d;
        es.compute(voigt_matrix(m), Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        if (lo < margin) { margin = lo; worst = x; }
    }
    if (worst_point) *worst_point = worst;
    return margin;
}

RadialConditionResult max_delta(const ElasticityTensorField& field,
                                const std::vector<Point>& samples, double tol,
                                double cap, double fd_step) {
    RadialConditionResult res;
    double lo = 1e-6;
    Point worst;
    double m_lo = radial_margin(field, lo, samples, fd_step, &worst);
    if (m_lo < 0.0) {
        res.holds = false;
        res.delta_max = 0.0;
        res.margin = m_lo;
        res.worst_point = worst;
        return res;
    }
    res.holds = true;
    double m_cap = radial_margin(field, cap, samples, fd_step, &worst);
    if (m_cap >= 0.0) {
        res.delta_max = cap;
        res.margin = m_cap;
        res.worst_point = worst;
        return res;
    }
    double hi = cap;
    // margin is nonincreasing in delta: keep the invariant margin(lo) >= 0.
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double m = radial_margin(field, mid, samples, fd_step, &worst);
        if (m >= 0.0) { lo = mid; m_lo = m; }
        else hi = mid;
    }
    res.delta_max = lo;
    res.margin = radial_margin(field, lo, samples, fd_step, &res.worst_point);
    return res;
}

double matrix_radial_margin(const MatrixField& field, double delta,
                            const std::vector<Point>& samples, double fd_step,
                            Point* worst_point) {
    if (samples.empty()) throw ConfigError("matrix_radial_margin: empty sample set");
    double margin = std::numeric_limits<double>::infinity();
    Point worst = samples.front();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    for (const Point& x : samples) {
        const double r = x.norm();
        if (r <= fd_step && !field.radial_deriv)
            throw ConfigError("matrix_radial_margin: sample too close to the origin");
        Eigen::MatrixXd a = field.eval(x);
        if ((a - a.transpose()).cwiseAbs().maxCoeff() >
            1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()))
            throw SymmetryViolation("matrix field is not symmetric");
        Eigen::MatrixXd da;
        if (field.radial_deriv) {
            da = field.radial_deriv(x);
        } else {
            const Point dir = x / r;
            da = (field.eval(x + fd_step * dir) - field.eval(x - fd_step * dir)) /
                 (2.0 * fd_step);
        }
        Eigen::MatrixXd m = (1.0 - delta) * a - 0.5 * r * da;
        es.compute(m, Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        if (lo < margin) { margin = lo; worst = x; }
    }
    if (worst_point) *worst_point = worst;
    return margin;
}

} // namespace ewdecay
