#include "ewdecay/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ewdecay {

namespace {

double tri_area2d(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

double tet_volume(const Point& a, const Point& b, const Point& c, const Point& d) {
    return (b - a).cross(c - a).dot(d - a) / 6.0;
}

// Distance from p to segment [a, b].
double point_segment_dist(const Point& p, const Point& a, const Point& b) {
    const Point ab = b - a;
    const double t = std::clamp(ab.dot(p - a) / ab.squaredNorm(), 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

// Distance from p to triangle (a, b, c). Ericson, Real-Time Collision Detection.
double point_triangle_dist(const Point& p, const Point& a, const Point& b, const Point& c) {
    const Point ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return (p - a).norm();
    const Point bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return (p - b).norm();
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return (p - (a + (d1 / (d1 - d3)) * ab)).norm();
    const Point cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return (p - c).norm();
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return (p - (a + (d2 / (d2 - d6)) * ac)).norm();
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + w * (c - b))).norm();
    }
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    return (p - (a + v * ab + w * ac)).norm();
}

} // namespace

Point Mesh::elem_centroid(int e) const {
    Point c = Point::Zero();
    for (int k = 0; k <= dim; ++k) c += nodes[elems[e][k]];
    return c / (dim + 1);
}

double Mesh::elem_measure(int e) const {
    const auto& el = elems[e];
    if (dim == 2) return tri_area2d(nodes[el[0]], nodes[el[1]], nodes[el[2]]);
    return tet_volume(nodes[el[0]], nodes[el[1]], nodes[el[2]], nodes[el[3]]);
}

Point Mesh::facet_centroid(const BoundaryFacet& f) const {
    Point c = Point::Zero();
    for (int k = 0; k < dim; ++k) c += nodes[f.nodes[k]];
    return c / dim;
}

double Mesh::min_radius() const {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& x : nodes) r = std::min(r, x.norm());
    return r;
}

double Mesh::max_radius() const {
    double r = 0;
    for (const auto& x : nodes) r = std::max(r, x.norm());
    return r;
}

double Mesh::total_measure() const {
    double v = 0;
    for (int e = 0; e < n_elems(); ++e) v += elem_measure(e);
    return v;
}

double Mesh::boundary_measure(int tag) const {
    double s = 0;
    for (const auto& f : facets)
        if (f.tag == tag) s += f.measure;
    return s;
}

std::vector<Point> Mesh::sample_points() const {
    std::vector<Point> pts;
    pts.reserve(nodes.size() + elems.size());
    for (int e = 0; e < n_elems(); ++e) pts.push_back(elem_centroid(e));
    pts.insert(pts.end(), nodes.begin(), nodes.end());
    return pts;
}

void Mesh::finalize() {
    if (dim != 2 && dim != 3) throw ValidationError("mesh: dim must be 2 or 3");
    for (auto& el : elems)
        for (int k = 0; k <= dim; ++k)
            if (el[k] < 0 || el[k] >= n_nodes())
                throw ValidationError("mesh: element node index out of range");

    // Positive orientation: swap the last two vertices of inverted simplices.
    for (int e = 0; e < n_elems(); ++e) {
        const double m = elem_measure(e);
        if (m == 0.0) throw ValidationError("mesh: degenerate element");
        if (m < 0.0) std::swap(elems[e][dim - 1], elems[e][dim]);
    }

    // Facet -> adjacent element lookup via sorted node keys.
    std::map<std::array<int, 3>, int> face_owner;
    auto face_key = [&](std::array<int, 3> f) {
        std::sort(f.begin(), f.end());
        return f;
    };
    for (int e = 0; e < n_elems(); ++e) {
        const auto& el = elems[e];
        for (int skip = 0; skip <= dim; ++skip) {
            std::array<int, 3> f{-1, -1, -1};
            int c = 0;
            for (int k = 0; k <= dim; ++k)
                if (k != skip) f[c++] = el[k];
            face_owner.emplace(face_key(f), e);
        }
    }

    for (auto& f : facets) {
        if (f.tag != kGamma0 && f.tag != kGamma1)
            throw ValidationError("mesh: boundary facet tag must be 0 or 1");
        for (int k = 0; k < dim; ++k)
            if (f.nodes[k] < 0 || f.nodes[k] >= n_nodes())
                throw ValidationError("mesh: facet node index out of range");
        std::array<int, 3> key{f.nodes[0], f.nodes[1], dim == 3 ? f.nodes[2] : -1};
        auto it = face_owner.find(face_key(key));
        if (it == face_owner.end())
            throw ValidationError("mesh: boundary facet does not match any element face");
        f.adj_elem = it->second;

        Eigen::Vector3d n;
        if (dim == 2) {
            const Point d = nodes[f.nodes[1]] - nodes[f.nodes[0]];
            f.measure = d.norm();
            n = Eigen::Vector3d(d[1], -d[0], 0.0);
        } else {
            const Point d1 = nodes[f.nodes[1]] - nodes[f.nodes[0]];
            const Point d2 = nodes[f.nodes[2]] - nodes[f.nodes[0]];
            n = d1.cross(d2);
            f.measure = 0.5 * n.norm();
        }
        if (f.measure <= 0.0) throw ValidationError("mesh: degenerate boundary facet");
        n.normalize();
        if (n.dot(facet_centroid(f) - elem_centroid(f.adj_elem)) < 0.0) n = -n;
        f.normal = n;
    }
}

Mesh gen_annulus_mesh(double R0, double R1, int n_r, int n_theta) {
    if (!(R0 > 0.0) || !(R1 > R0))
        throw ConfigError("annulus mesh: need 0 < R0 < R1");
    if (n_r < 2 || n_theta < 8)
        throw ConfigError("annulus mesh: need n_r >= 2 and n_theta >= 8");

    Mesh m;
    m.dim = 2;
    m.nodes.reserve(static_cast<std::size_t>(n_r + 1) * n_theta);
    for (int j = 0; j <= n_r; ++j) {
        const double r = R0 + (R1 - R0) * j / n_r;
        for (int i = 0; i < n_theta; ++i) {
            const double th = 2.0 * M_PI * i / n_theta;
            m.nodes.emplace_back(r * std::cos(th), r * std::sin(th), 0.0);
        }
    }
    auto idx = [&](int j, int i) { return j * n_theta + (i % n_theta); };
    for (int j = 0; j < n_r; ++j)
        for (int i = 0; i < n_theta; ++i) {
            const int a = idx(j, i), b = idx(j, i + 1);
            const int c = idx(j + 1, i + 1), d = idx(j + 1, i);
            m.elems.push_back({a, b, c, -1});
            m.elems.push_back({a, c, d, -1});
        }
    for (int i = 0; i < n_theta; ++i) {
        BoundaryFacet f0;
        f0.nodes = {idx(0, i), idx(0, i + 1), -1};
        f0.tag = kGamma0;
        m.facets.push_back(f0);
        BoundaryFacet f1;
        f1.nodes = {idx(n_r, i), idx(n_r, i + 1), -1};
        f1.tag = kGamma1;
        m.facets.push_back(f1);
    }
    m.finalize();
    return m;
}

Mesh gen_shell_mesh(double R0, double R1, int n_r, int n_face) {
    if (!(R0 > 0.0) || !(R1 > R0))
        throw ConfigError("shell mesh: need 0 < R0 < R1");
    if (n_r < 2 || n_face < 2)
        throw ConfigError("shell mesh: need n_r >= 2 and n_face >= 2");

    // Integer lattice points on the surface of the cube [0, n]^3, centrally
    // projected to the unit sphere (gnomonic cubed sphere). Integer keys make
    // the panel-seam node identification exact.
    const int n = n_face;
    std::map<std::array<int, 3>, int> surf_index;
    std::vector<Eigen::Vector3d> surf_dir;
    auto surface_point = [&](int i, int j, int k) -> int {
        const std::array<int, 3> key{i, j, k};
        auto it = surf_index.find(key);
        if (it != surf_index.end()) return it->second;
        Eigen::Vector3d q(2.0 * i / n - 1.0, 2.0 * j / n - 1.0, 2.0 * k / n - 1.0);
        q.normalize();
        const int id = static_cast<int>(surf_dir.size());
        surf_index.emplace(key, id);
        surf_dir.push_back(q);
        return id;
    };

    // Surface quads, outward oriented, one panel per cube face.
    std::vector<std::array<int, 4>> quads;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
            quads.push_back({surface_point(0, u, v), surface_point(0, u, v + 1),
                             surface_point(0, u + 1, v + 1), surface_point(0, u + 1, v)});
            quads.push_back({surface_point(n, u, v), surface_point(n, u + 1, v),
                             surface_point(n, u + 1, v + 1), surface_point(n, u, v + 1)});
            quads.push_back({surface_point(u, 0, v), surface_point(u + 1, 0, v),
                             surface_point(u + 1, 0, v + 1), surface_point(u, 0, v + 1)});
            quads.push_back({surface_point(u, n, v), surface_point(u, n, v + 1),
                             surface_point(u + 1, n, v + 1), surface_point(u + 1, n, v)});
            quads.push_back({surface_point(u, v, 0), surface_point(u, v + 1, 0),
                             surface_point(u + 1, v + 1, 0), surface_point(u + 1, v, 0)});
            quads.push_back({surface_point(u, v, n), surface_point(u + 1, v, n),
                             surface_point(u + 1, v + 1, n), surface_point(u, v + 1, n)});
        }

    // Triangulate each quad along the diagonal through its smallest surface
    // index. The choice depends only on the quad itself, so the surface
    // triangulation is globally consistent.
    std::vector<std::array<int, 3>> tris;
    for (const auto& q : quads) {
        const int mpos = static_cast<int>(
            std::min_element(q.begin(), q.end()) - q.begin());
        if (mpos == 0 || mpos == 2) {
            tris.push_back({q[0], q[1], q[2]});
            tris.push_back({q[0], q[2], q[3]});
        } else {
            tris.push_back({q[1], q[2], q[3]});
            tris.push_back({q[1], q[3], q[0]});
        }
    }

    const int n_surf = static_cast<int>(surf_dir.size());
    Mesh m;
    m.dim = 3;
    m.nodes.reserve(static_cast<std::size_t>(n_r + 1) * n_surf);
    for (int layer = 0; layer <= n_r; ++layer) {
        const double r = R0 + (R1 - R0) * layer / n_r;
        for (int s = 0; s < n_surf; ++s) m.nodes.push_back(r * surf_dir[s]);
    }
    auto idx = [&](int layer, int s) { return layer * n_surf + s; };

    // Prisms over each surface triangle, split into 3 tets by the staircase
    // rule on ascending surface indices; the quad-face diagonal then runs
    // from the smaller index on the bottom to the larger on top, which both
    // neighbours agree on.
    for (int layer = 0; layer < n_r; ++layer)
        for (const auto& t : tris) {
            std::array<int, 3> s = t;
            std::sort(s.begin(), s.end());
            const int b0 = idx(layer, s[0]), b1 = idx(layer, s[1]), b2 = idx(layer, s[2]);
            const int t0 = idx(layer + 1, s[0]), t1 = idx(layer + 1, s[1]),
                      t2 = idx(layer + 1, s[2]);
            m.elems.push_back({b0, b1, b2, t2});
            m.elems.push_back({b0, b1, t1, t2});
            m.elems.push_back({b0, t0, t1, t2});
        }

    for (const auto& t : tris) {
        BoundaryFacet f0;
        f0.nodes = {idx(0, t[0]), idx(0, t[1]), idx(0, t[2])};
        f0.tag = kGamma0;
        m.facets.push_back(f0);
        BoundaryFacet f1;
        f1.nodes = {idx(n_r, t[0]), idx(n_r, t[1]), idx(n_r, t[2])};
        f1.tag = kGamma1;
        m.facets.push_back(f1);
    }
    m.finalize();
    return m;
}

void save_mesh(const Mesh& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open mesh file for writing: " + path);
    char buf[64];
    out << m.dim << ' ' << m.n_nodes() << ' ' << m.n_elems() << ' '
        << m.facets.size() << '\n';
    for (const auto& x : m.nodes) {
        for (int d = 0; d < m.dim; ++d) {
            std::snprintf(buf, sizeof(buf), "%.17g", x[d]);
            out << (d ? " " : "") << buf;
        }
        out << '\n';
    }
    for (const auto& el : m.elems) {
        for (int k = 0; k <= m.dim; ++k) out << (k ? " " : "") << el[k];
        out << '\n';
    }
    for (const auto& f : m.facets) {
        for (int k = 0; k < m.dim; ++k) out << f.nodes[k] << ' ';
        out << f.tag << '\n';
    }
}

Mesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mesh file: " + path);
    std::string line;
    int lineno = 0;
    auto next_line = [&]() -> std::istringstream {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos)
                return std::istringstream(line);
        }
        throw ConfigError("mesh file " + path + ": unexpected end of file at line " +
                          std::to_string(lineno + 1));
    };
    auto parse_fail = [&](const std::string& what) {
        throw ConfigError("mesh file " + path + ":" + std::to_string(lineno) + ": " + what);
    };

    Mesh m;
    int n_nodes = 0, n_elems = 0, n_facets = 0;
    {
        auto ls = next_line();
        if (!(ls >> m.dim >> n_nodes >> n_elems >> n_facets))
            parse_fail("malformed header (want: dim n_nodes n_elems n_bfacets)");
    }
    if (m.dim != 2 && m.dim != 3) throw ValidationError("mesh file: dim must be 2 or 3");
    if (n_nodes <= 0 || n_elems <= 0 || n_facets < 0)
        throw ValidationError("mesh file: nonpositive counts");

    m.nodes.resize(n_nodes, Point::Zero());
    for (int i = 0; i < n_nodes; ++i) {
        auto ls = next_line();
        for (int d = 0; d < m.dim; ++d)
            if (!(ls >> m.nodes[i][d])) parse_fail("malformed node coordinates");
    }
    m.elems.resize(n_elems, {-1, -1, -1, -1});
    for (int e = 0; e < n_elems; ++e) {
        auto ls = next_line();
        for (int k = 0; k <= m.dim; ++k)
            if (!(ls >> m.elems[e][k])) parse_fail("malformed element record");
    }
    m.facets.resize(n_facets);
    for (int f = 0; f < n_facets; ++f) {
        auto ls = next_line();
        for (int k = 0; k < m.dim; ++k)
            if (!(ls >> m.facets[f].nodes[k])) parse_fail("malformed facet record");
        if (!(ls >> m.facets[f].tag)) parse_fail("missing facet tag");
    }
    m.finalize();
    return m;
}

SignReport check_boundary_signs(const Mesh& m, double tol) {
    SignReport rep;
    rep.tol = tol;
    rep.n_facets = static_cast<int>(m.facets.size());
    rep.pass = true;
    for (int i = 0; i < rep.n_facets; ++i) {
        const auto& f = m.facets[i];
        const Point c = m.facet_centroid(f);
        const double s = f.normal.dot(c / c.norm());
        const bool ok = (f.tag == kGamma0) ? (s <= tol) : (s >= -tol);
        if (!ok) {
            rep.pass = false;
            rep.violations.push_back(i);
            const double v = (f.tag == kGamma0) ? s : -s;
            rep.worst = std::max(rep.worst, v);
        }
    }
    return rep;
}

double smoothstep_ramp(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 0.5) return 1.0;
    const double t = 2.0 * s;
    return t * t * (3.0 - 2.0 * t);
}

double smoothstep_ramp_deriv(double s) {
    if (s <= 0.0 || s >= 0.5) return 0.0;
    const double t = 2.0 * s;
    return 12.0 * t * (1.0 - t);
}

double DampingField::eval_radius(double r) const {
    if (!enabled) return 0.0;
    return a0 * smoothstep_ramp((r - R_d) / (R1 - R_d));
}

double DampingField::deriv_radius(double r) const {
    if (!enabled) return 0.0;
    return a0 * smoothstep_ramp_deriv((r - R_d) / (R1 - R_d)) / (R1 - R_d);
}

DampingField DampingField::none(const Mesh& m) {
    DampingField a;
    a.enabled = false;
    a.nodal.assign(m.n_nodes(), 0.0);
    return a;
}

DampingField DampingField::bump(const Mesh& m, double R_d, double a0, double xi) {
    const double R0 = m.min_radius(), R1 = m.max_radius();
    if (!(R_d > R0) || !(R_d < R1 - xi))
        throw ConfigError(
            "damping layer must leave the clamped boundary undamped and cover the "
            "xi-collar of the free boundary: need R0 < R_d < R1 - xi");
    if (!(a0 > 0.0)) throw ConfigError("damping amplitude a0 must be positive");
    DampingField a;
    a.enabled = true;
    a.R_d = R_d;
    a.R1 = R1;
    a.a0 = a0;
    a.xi = xi;
    a.nodal.resize(m.n_nodes());
    for (int i = 0; i < m.n_nodes(); ++i) a.nodal[i] = a.eval(m.nodes[i]);
    return a;
}

CoverReport check_omega_cover(const Mesh& m, const DampingField& a, double xi,
                              double a_min) {
    CoverReport rep;
    rep.xi = xi;
    rep.a_min = a_min;
    std::vector<const BoundaryFacet*> free_facets;
    for (const auto& f : m.facets)
        if (f.tag == kGamma1) free_facets.push_back(&f);

    for (int i = 0; i < m.n_nodes(); ++i) {
        const Point& p = m.nodes[i];
        double dist = std::numeric_limits<double>::infinity();
        for (const auto* f : free_facets) {
            const double d =
                m.dim == 2
                    ? point_segment_dist(p, m.nodes[f->nodes[0]], m.nodes[f->nodes[1]])
                    : point_triangle_dist(p, m.nodes[f->nodes[0]], m.nodes[f->nodes[1]],
                                          m.nodes[f->nodes[2]]);
            dist = std::min(dist, d);
            if (dist <= xi) break;
        }
        if (dist <= xi) {
            ++rep.n_collar_nodes;
            const double av = i < static_cast<int>(a.nodal.size()) ? a.nodal[i] : a.eval(p);
            if (!(av >= a_min)) rep.violations.push_back(i);
        }
    }
    rep.pass = rep.violations.empty();
    return rep;
}

} // namespace ewdecay
