#include "ewdecay/vtk.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ewdecay {

void write_vtk_snapshot(const Mesh& mesh, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& v, long step, double t,
                        const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open snapshot file for writing: " + path);
    const int d = mesh.dim;
    char buf[256];

    out << "# vtk DataFile Version 3.0\n";
    std::snprintf(buf, sizeof(buf), "ewdecay snapshot step=%ld t=%.17g\n", step, t);
    out << buf;
    out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";

    out << "POINTS " << mesh.n_nodes() << " double\n";
    for (const auto& x : mesh.nodes) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", x[0], x[1], x[2]);
        out << buf;
    }

    const int npe = mesh.nodes_per_elem();
    out << "CELLS " << mesh.n_elems() << ' ' << mesh.n_elems() * (npe + 1) << '\n';
    for (const auto& el : mesh.elems) {
        out << npe;
        for (int k = 0; k < npe; ++k) out << ' ' << el[k];
        out << '\n';
    }
    out << "CELL_TYPES " << mesh.n_elems() << '\n';
    const int cell_type = d == 2 ? 5 : 10; // VTK_TRIANGLE / VTK_TETRA
    for (int e = 0; e < mesh.n_elems(); ++e) out << cell_type << '\n';

    out << "POINT_DATA " << mesh.n_nodes() << '\n';
    auto write_field = [&](const char* name, const Eigen::VectorXd& w) {
        out << "VECTORS " << name << " double\n";
        for (int i = 0; i < mesh.n_nodes(); ++i) {
            const double z = d == 3 ? w[i * d + 2] : 0.0;
            std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", w[i * d], w[i * d + 1],
                          z);
            out << buf;
        }
    };
    write_field("u", u);
    write_field("v", v);
}

VtkSnapshot read_vtk_snapshot(const std::string& path, int dim) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open snapshot file: " + path);
    std::string line;
    std::getline(in, line); // version line
    std::getline(in, line); // title carries step and time
    VtkSnapshot snap;
    {
        const auto spos = line.find("step=");
        const auto tpos = line.find("t=");
        if (spos == std::string::npos || tpos == std::string::npos)
            throw ConfigError("snapshot file " + path + ": missing step/t in title");
        snap.step = std::strtol(line.c_str() + spos + 5, nullptr, 10);
        snap.t = std::strtod(line.c_str() + tpos + 2, nullptr);
    }

    int n_points = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "POINTS") {
            ls >> n_points;
            for (int i = 0; i < n_points; ++i) std::getline(in, line);
        } else if (kw == "CELLS") {
            int nc = 0, tot = 0;
            ls >> nc >> tot;
            for (int i = 0; i < nc; ++i) std::getline(in, line);
        } else if (kw == "CELL_TYPES") {
            int nc = 0;
            ls >> nc;
            for (int i = 0; i < nc; ++i) std::getline(in, line);
        } else if (kw == "VECTORS") {
            std::string name, type;
            ls >> name >> type;
            Eigen::VectorXd w(n_points * dim);
            for (int i = 0; i < n_points; ++i) {
                double x = 0, y = 0, z = 0;
                in >> x >> y >> z;
                w[i * dim] = x;
                w[i * dim + 1] = y;
                if (dim == 3) w[i * dim + 2] = z;
            }
            std::getline(in, line); // trailing newline
            if (name == "u") snap.u = std::move(w);
            else if (name == "v") snap.v = std::move(w);
        }
    }
    if (snap.u.size() == 0 || snap.v.size() == 0)
        throw ConfigError("snapshot file " + path + ": missing u or v point vectors");
    return snap;
}

} // namespace ewdecay
