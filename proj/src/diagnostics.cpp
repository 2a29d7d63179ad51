#include "ewdecay/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ewdecay/mms.hpp"
#include "ewdecay/runner.hpp"

namespace ewdecay {

double dissipation_residual(const EnergyTrace& trace) {
    if (trace.rows.empty()) throw ConfigError("dissipation residual: empty trace");
    const double e0 = trace.e0();
    if (!(e0 > 0.0))
        throw ConfigError("dissipation residual: undefined, E(0) is not positive");
    double worst = 0;
    for (const auto& r : trace.rows)
        worst = std::max(worst, std::abs(r.e_total - e0 + r.d_cum));
    return worst / e0;
}

DecayFit fit_decay(const EnergyTrace& trace, double t_lo, double t_hi) {
    if (trace.rows.empty()) throw ConfigError("decay fit: empty trace");
    const double e0 = trace.e0();
    DecayFit fit;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;

    std::vector<double> ts, ys;
    for (const auto& r : trace.rows) {
        if (r.t < t_lo || r.t > t_hi) continue;
        if (!(r.e_total > 0.0))
            throw ConfigError("decay fit: nonpositive energy inside the fit window");
        if (r.e_total <= 1e-14 * e0) continue;
        ts.push_back(r.t);
        ys.push_back(std::log(r.e_total));
    }
    fit.n_records = static_cast<int>(ts.size());
    if (fit.n_records < 10)
        throw ConfigError("decay fit: need at least 10 usable records in the window");

    const double n = static_cast<double>(ts.size());
    double st = 0, sy = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) { st += ts[i]; sy += ys[i]; }
    const double tbar = st / n, ybar = sy / n;
    double stt = 0, sty = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        stt += (ts[i] - tbar) * (ts[i] - tbar);
        sty += (ts[i] - tbar) * (ys[i] - ybar);
    }
    const double slope = stt > 0 ? sty / stt : 0.0;
    const double intercept = ybar - slope * tbar;
    fit.c2 = -slope;
    fit.c1 = std::exp(intercept) / e0;

    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double pred = intercept + slope * ts[i];
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
    }
    // Constant data fits perfectly; guard against roundoff-scale ss_tot.
    const double tiny = 1e-24 * n * (1.0 + ybar * ybar);
    fit.r_squared = ss_tot > tiny ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

double PhiSpec::phi(double r) const {
    if (mode == Mode::One) return 1.0;
    return 1.0 - smoothstep_ramp((r - r_inner) / (r_outer - r_inner));
}

double PhiSpec::dphi(double r) const {
    if (mode == Mode::One) return 0.0;
    return -smoothstep_ramp_deriv((r - r_inner) / (r_outer - r_inner)) /
           (r_outer - r_inner);
}

double PhiSpec::div_h(double r, int dim) const {
    return dim * phi(r) + r * dphi(r);
}

namespace {

// phi'' of the cutoff (piecewise; the C^1 ramp has bounded second
// derivative away from the two knots).
double phi_second(const PhiSpec& spec, double r) {
    if (spec.mode == PhiSpec::Mode::One) return 0.0;
    const double w = spec.r_outer - spec.r_inner;
    const double s = (r - spec.r_inner) / w;
    if (s <= 0.0 || s >= 0.5) return 0.0;
    const double t = 2.0 * s;
    return -(24.0 - 48.0 * t) / (w * w);
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
    double s = 0;
    for (std::size_t k = 1; k < t.size(); ++k)
        s += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
    return s;
}

double power_energy(const Eigen::VectorXd& vals, const NonlinearityParams& nl, int dim,
                    double power_shift) {
    // sum_c |u_c|^{p_c + 1} weighted by 1/(p_c+1) when power_shift == 1.
    double s = 0;
    for (int c = 0; c < dim; ++c) {
        const double w = power_shift == 1.0 ? 1.0 / (nl.p[c] + 1.0) : 1.0;
        s += w * std::pow(std::abs(vals[c]), nl.p[c] + 1.0);
    }
    return s;
}

} // namespace

MultiplierReport morawetz_check(const Mesh& mesh, const ElasticityTensorField& field,
                                const DampingField& damping,
                                const NonlinearityParams& nl, const Snapshots& snaps,
                                const PhiSpec& phi, double delta, double beta) {
    const int n_snap = static_cast<int>(snaps.times.size());
    if (n_snap < 2) throw ConfigError("multiplier check: need at least two snapshots");
    for (int k = 1; k < n_snap; ++k)
        if (snaps.times[k] - snaps.times[k - 1] > 0.1 + 1e-12)
            throw ConfigError("multiplier check: snapshot spacing exceeds 0.1; "
                              "record snapshots more densely");
    const int d = mesh.dim;

    // Per-element immutable data.
    const int ne = mesh.n_elems();
    std::vector<Rank4> a_elem;
    a_elem.reserve(ne);
    std::vector<double> vol(ne), a_damp(ne), phi_c(ne), dphi_c(ne), divh_c(ne), r_c(ne);
    std::vector<Point> cent(ne);
    for (int e = 0; e < ne; ++e) {
        cent[e] = mesh.elem_centroid(e);
        vol[e] = mesh.elem_measure(e);
        r_c[e] = cent[e].norm();
        a_elem.push_back(field.eval(cent[e]));
        a_damp[e] = damping.eval(cent[e]);
        phi_c[e] = phi.phi(r_c[e]);
        dphi_c[e] = phi.dphi(r_c[e]);
        divh_c[e] = phi.div_h(r_c[e], d);
    }
    // delta_c for the companion scalar-multiplier estimate.
    double delta_c = delta;
    if (nl.enabled)
        for (int c = 0; c < d; ++c)
            delta_c = std::min(delta_c, d * (nl.p[c] - 1.0) / (2.0 * (nl.p[c] + 1.0)));

    std::vector<double> ts(snaps.times.begin(), snaps.times.end());
    std::vector<double> s_flux(n_snap, 0.0), s_lat(n_snap, 0.0), s_delta(n_snap, 0.0),
        s_gradphi(n_snap, 0.0), s_damp(n_snap, 0.0), s_divh(n_snap, 0.0),
        s_lhs_p(n_snap, 0.0), s_gradp(n_snap, 0.0), s_bdry_p(n_snap, 0.0);
    std::vector<double> endpoint_snap(n_snap, 0.0), endpoint_p(n_snap, 0.0),
        endpoint_pa(n_snap, 0.0);

    Eigen::VectorXd u_c(d), v_c(d), Hu(d);
    for (int k = 0; k < n_snap; ++k) {
        const Eigen::VectorXd& u = snaps.u[k];
        const Eigen::VectorXd& v = snaps.v[k];
        for (int e = 0; e < ne; ++e) {
            const auto& el = mesh.elems[e];
            const Eigen::MatrixXd grad = displacement_gradient(mesh, e, u);
            const Eigen::MatrixXd eps = 0.5 * (grad + grad.transpose());
            const double se = contract(a_elem[e], eps, eps); // sigma : eps
            u_c.setZero();
            v_c.setZero();
            for (int kk = 0; kk <= d; ++kk)
                for (int c = 0; c < d; ++c) {
                    u_c[c] += u[el[kk] * d + c] / (d + 1);
                    v_c[c] += v[el[kk] * d + c] / (d + 1);
                }
            const Eigen::Vector3d H = phi_c[e] * cent[e];
            for (int i = 0; i < d; ++i) {
                double s = 0;
                for (int m = 0; m < d; ++m) s += grad(i, m) * H[m];
                Hu[i] = s;
            }
            const double vv = v_c.squaredNorm();
            const double f2 = nl.enabled ? 2.0 * power_energy(u_c, nl, d, 1.0) : 0.0;
            const double gradsq = grad.squaredNorm();

            s_delta[k] += vol[e] * phi_c[e] * se;
            s_gradphi[k] += vol[e] * r_c[e] * std::abs(dphi_c[e]) * gradsq;
            s_damp[k] += vol[e] * a_damp[e] * v_c.dot(Hu);
            s_divh[k] += 0.5 * vol[e] * (vv - se - f2) * divh_c[e];
            endpoint_snap[k] += vol[e] * v_c.dot(Hu);

            // Companion estimate with P = (div H - phi delta_c) / 2.
            const double P = 0.5 * (divh_c[e] - phi_c[e] * delta_c);
            const double fp = nl.enabled ? power_energy(u_c, nl, d, 0.0) : 0.0;
            s_lhs_p[k] += vol[e] * P * (vv - se - fp);
            const double dP =
                0.5 * std::abs((d + 1) * dphi_c[e] + r_c[e] * phi_second(phi, r_c[e]) -
                               delta_c * dphi_c[e]);
            s_gradp[k] += vol[e] * dP * u_c.norm() * std::sqrt(gradsq);
            endpoint_p[k] += vol[e] * P * v_c.dot(u_c);
            endpoint_pa[k] += 0.5 * vol[e] * P * a_damp[e] * u_c.squaredNorm();
        }

        for (const auto& f : mesh.facets) {
            const Eigen::MatrixXd grad = displacement_gradient(mesh, f.adj_elem, u);
            const Eigen::MatrixXd eps = 0.5 * (grad + grad.transpose());
            const Point cf = mesh.facet_centroid(f);
            const double rf = cf.norm();
            const Rank4 af = field.eval(cf);
            const Eigen::MatrixXd sig = stress(af, eps);
            const double se = contract(af, eps, eps);
            u_c.setZero();
            v_c.setZero();
            for (int kk = 0; kk < d; ++kk)
                for (int c = 0; c < d; ++c) {
                    u_c[c] += u[f.nodes[kk] * d + c] / d;
                    v_c[c] += v[f.nodes[kk] * d + c] / d;
                }
            const Eigen::Vector3d H = phi.phi(rf) * cf;
            for (int i = 0; i < d; ++i) {
                double s = 0;
                for (int m = 0; m < d; ++m) s += grad(i, m) * H[m];
                Hu[i] = s;
            }
            Eigen::VectorXd snu(d);
            for (int i = 0; i < d; ++i) {
                double s = 0;
                for (int j = 0; j < d; ++j) s += sig(i, j) * f.normal[j];
                snu[i] = s;
            }
            const double hnu = H.dot(f.normal);
            const double f2 = nl.enabled ? 2.0 * power_energy(u_c, nl, d, 1.0) : 0.0;
            s_flux[k] += f.measure * Hu.dot(snu);
            s_lat[k] += 0.5 * f.measure * (v_c.squaredNorm() - se - f2) * hnu;
            const double P = 0.5 * (phi.div_h(rf, d) - phi.phi(rf) * delta_c);
            s_bdry_p[k] += f.measure * P * u_c.dot(snu);
        }
    }

    MultiplierReport rep;
    rep.delta = delta;
    rep.duration = ts.back() - ts.front();
    rep.terms.boundary_flux = trapezoid(ts, s_flux);
    rep.terms.boundary_lateral = trapezoid(ts, s_lat);
    rep.terms.endpoint = endpoint_snap.back() - endpoint_snap.front();
    rep.terms.delta_term = delta * trapezoid(ts, s_delta);
    rep.terms.grad_phi = -beta * trapezoid(ts, s_gradphi);
    rep.terms.damping_cross = trapezoid(ts, s_damp);
    rep.terms.div_h = trapezoid(ts, s_divh);
    rep.lhs = rep.terms.boundary_flux + rep.terms.boundary_lateral;
    rep.rhs = rep.terms.endpoint + rep.terms.delta_term + rep.terms.grad_phi +
              rep.terms.damping_cross + rep.terms.div_h;
    rep.slack = rep.lhs - rep.rhs;

    rep.lhs_p = trapezoid(ts, s_lhs_p);
    rep.rhs_p = (endpoint_p.back() - endpoint_p.front()) +
                (endpoint_pa.back() - endpoint_pa.front()) -
                beta * trapezoid(ts, s_gradp) - trapezoid(ts, s_bdry_p);
    rep.slack_p = rep.lhs_p - rep.rhs_p;
    return rep;
}

ObservabilityReport observability_ratio(const EnergyTrace& trace) {
    if (trace.rows.size() < 2) throw ConfigError("observability: trace too short");
    ObservabilityReport rep;
    std::vector<double> ts, es;
    for (const auto& r : trace.rows) {
        ts.push_back(r.t);
        es.push_back(r.e_total);
    }
    rep.e_integral = trapezoid(ts, es);
    rep.dissipated = trace.rows.back().d_cum;
    rep.time_horizon = ts.back() - ts.front();
    rep.finite = rep.dissipated > 0.0;
    rep.rho = rep.finite ? rep.e_integral / rep.dissipated
                         : std::numeric_limits<double>::infinity();
    return rep;
}

ObservabilityEnsemble observability_ensemble(const RunConfig& base, int n_seeds) {
    if (n_seeds < 1) throw ConfigError("observability ensemble: need at least one seed");
    ObservabilityEnsemble ens;
    ens.all_finite = true;
    RunConfig cfg = base;
    cfg.initial.kind = "random-seeded";
    cfg.output.dir.clear();
    for (int k = 0; k < n_seeds; ++k) {
        cfg.initial.seed = base.initial.seed + static_cast<std::uint64_t>(k);
        const SimulationResult res = run_simulation(cfg);
        const ObservabilityReport rep = observability_ratio(res.trace);
        ens.rhos.push_back(rep.rho);
        ens.all_finite = ens.all_finite && rep.finite;
        ens.rho_max = std::max(ens.rho_max, rep.rho);
    }
    return ens;
}

ConvergenceTable convergence_study(const RunConfig& base, int levels) {
    if (levels < 3) throw ConfigError("convergence study: need at least 3 levels");
    if (!base.mms.enabled)
        throw ConfigError("convergence study: config must enable the mms block");
    if (base.tensor.kind != "constant-lame")
        throw ConfigError("convergence study: manufactured runs need constant moduli");

    ConvergenceTable table;
    for (int lvl = 0; lvl < levels; ++lvl) {
        RunConfig cfg = base;
        const int f = 1 << lvl;
        cfg.geometry.n_r *= f;
        cfg.geometry.n_theta *= f;
        cfg.geometry.n_face *= f;
        cfg.geometry.n_r_3d *= f;
        cfg.time.dt_max = base.time.dt_max / f;

        const Mesh mesh = build_mesh(cfg);
        const ElasticityTensorField field = build_tensor(cfg);
        const DampingField damping = build_damping(cfg, mesh);
        const NonlinearityParams nl = build_nonlinearity(cfg);
        const AssembledSystem sys = assemble(mesh, field, damping);

        ManufacturedSolution mms(cfg.mms.kind, cfg.geometry.dim, cfg.tensor.lambda0,
                                 cfg.tensor.mu0, cfg.mms.omega, cfg.mms.amplitude,
                                 mesh.min_radius(), mesh.max_radius());
        const ExternalForcing forcing = mms.make_forcing(mesh, sys, damping, nl);

        Eigen::VectorXd u0, v0;
        mms.initial_fields(mesh, u0, v0);
        const DtEstimate est = stable_dt(sys, cfg.time.cfl, cfg.time.dt_max);
        const long n_steps =
            static_cast<long>(std::ceil(cfg.time.T / est.dt - 1e-12));
        const double dt = cfg.time.T / static_cast<double>(n_steps);

        Simulator sim(sys, nl, dt, u0, v0, &forcing);
        std::vector<double> ts{0.0};
        std::vector<double> e2{std::pow(mms.l2_error(mesh, sys, sim.u(), 0.0), 2)};
        for (long s = 1; s <= n_steps; ++s) {
            sim.advance();
            if (s % cfg.time.record_every == 0 || s == n_steps) {
                ts.push_back(sim.t());
                e2.push_back(std::pow(mms.l2_error(mesh, sys, sim.u(), sim.t()), 2));
            }
        }

        ConvergenceLevel row;
        row.dt = dt;
        row.error = std::sqrt(trapezoid(ts, e2));
        double hmax = 0;
        for (int e = 0; e < mesh.n_elems(); ++e)
            for (int a = 0; a <= mesh.dim; ++a)
                for (int b = a + 1; b <= mesh.dim; ++b)
                    hmax = std::max(hmax, (mesh.nodes[mesh.elems[e][a]] -
                                           mesh.nodes[mesh.elems[e][b]])
                                              .norm());
        row.h = hmax;
        table.levels.push_back(row);
    }

    for (std::size_t l = 1; l < table.levels.size(); ++l) {
        const double e0 = table.levels[l - 1].error, e1 = table.levels[l].error;
        if (!(e1 < e0)) table.monotone = false;
        table.pair_orders.push_back(std::log2(e0 / std::max(e1, 1e-300)));
    }
    // Least-squares slope of log(error) against log(h).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(table.levels.size());
    for (const auto& row : table.levels) {
        const double x = std::log(row.h), y = std::log(std::max(row.error, 1e-300));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    table.lsq_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return table;
}

std::string format_convergence_table(const ConvergenceTable& t) {
    std::ostringstream out;
    char buf[160];
    out << "  level           h          dt    L2 error   order\n";
    for (std::size_t l = 0; l < t.levels.size(); ++l) {
        const auto& row = t.levels[l];
        if (l == 0)
            std::snprintf(buf, sizeof(buf), "  %5zu  %10.4e  %10.4e  %10.4e       -\n", l,
                          row.h, row.dt, row.error);
        else
            std::snprintf(buf, sizeof(buf), "  %5zu  %10.4e  %10.4e  %10.4e  %6.3f\n", l,
                          row.h, row.dt, row.error, t.pair_orders[l - 1]);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "  observed order (least squares): %.3f%s\n",
                  t.lsq_order, t.monotone ? "" : "  [non-monotone errors]");
    out << buf;
    return out.str();
}

void append_diagnostics_csv(const std::string& path, const std::string& name,
                            double value, double tolerance, bool pass) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw ConfigError("cannot open diagnostics file: " + path);
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%d\n", name.c_str(), value, tolerance,
                  pass ? 1 : 0);
    out << buf;
}

} // namespace ewdecay
