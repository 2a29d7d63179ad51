#pragma once

// Legacy ASCII VTK unstructured-grid snapshots carrying the nodal
// displacement and velocity as point vector fields, plus a narrow reader
// for the files this writer produces (used by the multiplier verifier).

#include <Eigen/Dense>
#include <string>

#include "ewdecay/geometry.hpp"

namespace ewdecay {

void write_vtk_snapshot(const Mesh& mesh, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& v, long step, double t,
                        const std::string& path);

struct VtkSnapshot {
    long step = 0;
    double t = 0;
    Eigen::VectorXd u, v; // node-major, mesh dim components per node
};

VtkSnapshot read_vtk_snapshot(const std::string& path, int dim);

} // namespace ewdecay
