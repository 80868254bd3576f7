#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "xmesh/assembly.hpp"
#include "xmesh/mesh.hpp"

namespace xmesh {

/// Per-snapshot fields attached to a VTK file.
struct VtkFields {
    Eigen::VectorXd temperature;          // [K], one per node
    std::vector<double> displacement_mag; // |x - X0|, one per node
    std::vector<int> phase;               // 0 solid / 1 liquid, one per cell
    std::vector<int> clamped;             // 1 if the Jacobian clamp engaged, one per cell
};

/// Builds the standard field set from a step state.
inline VtkFields make_vtk_fields(const MeshTopology& topo, const MeshState& ref,
                                 const StepState& state, double T0, double A_tol) {
    VtkFields f;
    f.temperature = state.temps;
    f.displacement_mag.resize(topo.node_count);
    for (int i = 0; i < topo.node_count; ++i)
        f.displacement_mag[i] = (state.coords[i] - ref.reference_coords[i]).norm();
    f.phase.resize(topo.triangles.size());
    f.clamped.resize(topo.triangles.size());
    for (size_t t = 0; t < topo.triangles.size(); ++t) {
        const auto& tri = topo.triangles[t];
        double Tc = (state.temps[tri[0]] + state.temps[tri[1]] + state.temps[tri[2]]) / 3.0;
        f.phase[t] = Tc > T0 ? 1 : 0;
        double A = signed_area(state.coords[tri[0]], state.coords[tri[1]], state.coords[tri[2]]);
        double J = A / ref.reference_areas[t];
        f.clamped[t] = std::abs(J) < A_tol / ref.reference_areas[t] ? 1 : 0;
    }
    return f;
}

/// Legacy-ASCII unstructured-grid snapshot writer.
inline void write_vtk(const MeshTopology& topo, const StepState& state, const VtkFields& fields,
                      const std::string& path) {
    if (fields.temperature.size() != topo.node_count ||
        fields.displacement_mag.size() != static_cast<size_t>(topo.node_count) ||
        fields.phase.size() != topo.triangles.size() ||
        fields.clamped.size() != topo.triangles.size())
        throw InvalidInput("write_vtk: field length does not match mesh");

    std::ofstream out(path);
    if (!out) throw Error("write_vtk: cannot open " + path);
    out << "# vtk DataFile Version 3.0\n";
    out << "phase change snapshot t=" << std::setprecision(17) << state.time << "\n";
    out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << topo.node_count << " double\n";
    out << std::setprecision(17);
    for (int i = 0; i < topo.node_count; ++i)
        out << state.coords[i].x() << " " << state.coords[i].y() << " 0\n";
    out << "CELLS " << topo.triangles.size() << " " << 4 * topo.triangles.size() << "\n";
    for (const auto& tri : topo.triangles) out << "3 " << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
    out << "CELL_TYPES " << topo.triangles.size() << "\n";
    for (size_t t = 0; t < topo.triangles.size(); ++t) out << "5\n";
    out << "POINT_DATA " << topo.node_count << "\n";
    out << "SCALARS temperature double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < topo.node_count; ++i) out << fields.temperature[i] << "\n";
    out << "SCALARS displacement_magnitude double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < topo.node_count; ++i) out << fields.displacement_mag[i] << "\n";
    out << "CELL_DATA " << topo.triangles.size() << "\n";
    out << "SCALARS phase int 1\nLOOKUP_TABLE default\n";
    for (int p : fields.phase) out << p << "\n";
    out << "SCALARS clamped int 1\nLOOKUP_TABLE default\n";
    for (int c : fields.clamped) out << c << "\n";
    if (!out) throw Error("write_vtk: write failed for " + path);
}

/// Zero-padded snapshot file name, e.g. prefix_000012.vtk.
inline std::string vtk_snapshot_path(const std::string& dir, const std::string& prefix, int step) {
    std::ostringstream os;
    os << dir << "/" << prefix << "_" << std::setw(6) << std::setfill('0') << step << ".vtk";
    return os.str();
}

/// One row per accepted time step of a simulation.
struct SeriesSample {
    double time = 0.0;      // [s]
    double front_pos = 0.0; // representative front coordinate [m]
    double xi = 0.0;        // relative front error vs the exact solution (NaN if no oracle)
    int iterations = 0;
    double err = 0.0;       // final correction norm [K]
};

struct TimeSeries {
    std::vector<SeriesSample> samples;
    std::vector<std::string> events; // "t=...: nucleation|coalescence|annihilation"
};

inline void write_series_csv(const TimeSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_series_csv: cannot open " + path);
    out << "time_s,front_pos_m,xi,iterations,err_K\n";
    out << std::setprecision(17);
    for (const auto& s : series.samples)
        out << s.time << "," << s.front_pos << "," << s.xi << "," << s.iterations << "," << s.err
            << "\n";
    if (!out) throw Error("write_series_csv: write failed for " + path);
}

inline TimeSeries read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFound("read_series_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "time_s,front_pos_m,xi,iterations,err_K")
        throw ParseError("read_series_csv: bad header in " + path);
    TimeSeries series;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream is(line);
        SeriesSample s;
        char c1, c2, c3, c4;
        if (!(is >> s.time >> c1 >> s.front_pos >> c2 >> s.xi >> c3 >> s.iterations >> c4 >> s.err) ||
            c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',')
            throw ParseError("read_series_csv: bad row at line " + std::to_string(line_no));
        series.samples.push_back(s);
    }
    return series;
}

} // namespace xmesh
