#pragma once

// Simplicial meshes of annular/shell domains with a clamped inner boundary
// (tag 0) and a traction-free outer boundary (tag 1), plus the nonnegative
// C^1 damping coefficient a(x) supported on an outer layer. Includes the
// two geometric checks the solver requires before a run: boundary normals
// have the right radial sign per tag, and the damping region covers a
// xi-collar of the free boundary.

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "ewdecay/tensor.hpp"

namespace ewdecay {

inline constexpr int kGamma0 = 0; // clamped boundary tag
inline constexpr int kGamma1 = 1; // traction-free boundary tag

struct BoundaryFacet {
    std::array<int, 3> nodes{-1, -1, -1}; // dim entries used (edge or triangle)
    int tag = kGamma0;
    int adj_elem = -1;
    Eigen::Vector3d normal = Eigen::Vector3d::Zero(); // unit, outward
    double measure = 0.0;                             // length / area
};

class Mesh {
public:
    int dim = 2;
    std::vector<Point> nodes;
    std::vector<std::array<int, 4>> elems; // dim+1 entries used
    std::vector<BoundaryFacet> facets;

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_elems() const { return static_cast<int>(elems.size()); }
    int nodes_per_elem() const { return dim + 1; }
    int nodes_per_facet() const { return dim; }

    Point elem_centroid(int e) const;
    double elem_measure(int e) const; // signed area/volume (positive after finalize)
    Point facet_centroid(const BoundaryFacet& f) const;

    double min_radius() const;
    double max_radius() const;
    double total_measure() const;
    double boundary_measure(int tag) const;

    // Checker sample set: element centroids (quadrature points) plus nodes.
    std::vector<Point> sample_points() const;

    // Orientation fix-up, boundary facet adjacency/normals/measures,
    // index validation. Must be called after building or mutating the arrays.
    void finalize();
};

Mesh gen_annulus_mesh(double R0, double R1, int n_r, int n_theta);
Mesh gen_shell_mesh(double R0, double R1, int n_r, int n_face);

void save_mesh(const Mesh& m, const std::string& path);
Mesh load_mesh(const std::string& path);

struct SignReport {
    bool pass = false;
    double tol = 0.0;
    int n_facets = 0;
    std::vector<int> violations; // facet indices
    double worst = 0.0;          // most violating signed value
};

// <x/|x|, nu> must be <= tol on tag-0 facets and >= -tol on tag-1 facets.
SignReport check_boundary_signs(const Mesh& m, double tol = 1e-8);

// C^1 ramp: 0 for s <= 0, 1 for s >= 1/2, cubic smoothstep in between.
double smoothstep_ramp(double s);
double smoothstep_ramp_deriv(double s);

struct DampingField {
    bool enabled = false;
    double R_d = 0.0; // damping layer starts here
    double R1 = 0.0;  // ramp scale reference (outer radius)
    double a0 = 0.0;  // amplitude
    double xi = 0.0;  // collar thickness the layer must cover
    std::vector<double> nodal;

    double eval_radius(double r) const;
    double eval(const Point& x) const { return eval_radius(x.norm()); }
    // d a / d r, for manufactured forcing and multiplier quadrature.
    double deriv_radius(double r) const;

    static DampingField none(const Mesh& m);
    // a(x) = a0 * ramp((|x| - R_d) / (R1 - R_d)); support is {|x| > R_d}.
    // Requires R0 < R_d < R1 - xi so the xi-collar of the free boundary
    // lies inside the damped region.
    static DampingField bump(const Mesh& m, double R_d, double a0, double xi);
};

struct CoverReport {
    bool pass = false;
    double xi = 0.0;
    double a_min = 0.0;
    int n_collar_nodes = 0;
    std::vector<int> violations; // node indices
};

// Every node within distance xi of a tag-1 facet must have a >= a_min.
CoverReport check_omega_cover(const Mesh& m, const DampingField& a, double xi,
                              double a_min);

} // namespace ewdecay
