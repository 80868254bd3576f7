#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xmesh/error.hpp"

namespace xmesh {

using Vec2 = Eigen::Vector2d;

/// Fixed node/edge/triangle adjacency of a triangular mesh. Built once,
/// never modified while a simulation runs: only node coordinates move.
struct MeshTopology {
    int node_count = 0;
    std::vector<std::array<int, 3>> triangles;   // CCW in reference configuration
    std::vector<std::array<int, 2>> edges;       // a < b
    std::vector<std::array<int, 2>> edge_tris;   // incident triangles, -1 if none
    std::vector<std::vector<int>> node_edges;    // per-node incident edge ids
    std::vector<std::array<int, 3>> tri_edges;   // per-triangle edge ids
    std::vector<int> boundary_edges;             // edge ids with one incident triangle
    std::vector<bool> is_boundary_node;
    std::map<std::string, std::vector<int>> dirichlet_tags; // named boundary node groups

    int edge_between(int a, int b) const {
        if (a > b) std::swap(a, b);
        for (int e : node_edges[a])
            if (edges[e][0] == a && edges[e][1] == b) return e;
        return -1;
    }

    bool is_boundary_edge(int e) const { return edge_tris[e][1] < 0; }
};

/// Node coordinates: the frozen reference configuration X0 plus the current
/// positions, and the reference element areas used by the Jacobian clamp.
struct MeshState {
    std::vector<Vec2> reference_coords; // X0, immutable after construction
    std::vector<Vec2> current_coords;   // Xn
    std::vector<double> reference_areas; // A0 per triangle, > 0
};

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

namespace detail {

/// Completes edges/adjacency from node_count + triangles (+ boundary groups).
inline void finalize_topology(MeshTopology& topo) {
    std::map<std::array<int, 2>, int> edge_ids;
    for (size_t t = 0; t < topo.triangles.size(); ++t) {
        const auto& tri = topo.triangles[t];
        for (int k = 0; k < 3; ++k) {
            int a = tri[k], b = tri[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            edge_ids.emplace(std::array<int, 2>{a, b}, -1);
        }
    }
    topo.edges.clear();
    topo.edges.reserve(edge_ids.size());
    for (auto& [key, id] : edge_ids) {
        id = static_cast<int>(topo.edges.size());
        topo.edges.push_back(key);
    }
    topo.edge_tris.assign(topo.edges.size(), {-1, -1});
    topo.tri_edges.assign(topo.triangles.size(), {-1, -1, -1});
    for (size_t t = 0; t < topo.triangles.size(); ++t) {
        const auto& tri = topo.triangles[t];
        for (int k = 0; k < 3; ++k) {
            int a = tri[k], b = tri[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            int e = edge_ids.at({a, b});
            topo.tri_edges[t][k] = e;
            if (topo.edge_tris[e][0] < 0)
                topo.edge_tris[e][0] = static_cast<int>(t);
            else if (topo.edge_tris[e][1] < 0)
                topo.edge_tris[e][1] = static_cast<int>(t);
            else
                throw InvalidInput("edge " + std::to_string(e) + " has more than two incident triangles");
        }
    }
    topo.node_edges.assign(topo.node_count, {});
    for (size_t e = 0; e < topo.edges.size(); ++e) {
        topo.node_edges[topo.edges[e][0]].push_back(static_cast<int>(e));
        topo.node_edges[topo.edges[e][1]].push_back(static_cast<int>(e));
    }
    topo.boundary_edges.clear();
    topo.is_boundary_node.assign(topo.node_count, false);
    for (size_t e = 0; e < topo.edges.size(); ++e) {
        if (topo.edge_tris[e][1] < 0) {
            topo.boundary_edges.push_back(static_cast<int>(e));
            topo.is_boundary_node[topo.edges[e][0]] = true;
            topo.is_boundary_node[topo.edges[e][1]] = true;
        }
    }
}

inline void finalize_state(const MeshTopology& topo, MeshState& state) {
    state.current_coords = state.reference_coords;
    state.reference_areas.resize(topo.triangles.size());
    for (size_t t = 0; t < topo.triangles.size(); ++t) {
        const auto& tri = topo.triangles[t];
        double a = signed_area(state.reference_coords[tri[0]], state.reference_coords[tri[1]],
                               state.reference_coords[tri[2]]);
        if (a <= 0.0)
            throw InvalidInput("triangle " + std::to_string(t) + " has non-positive reference area");
        state.reference_areas[t] = a;
    }
}

} // namespace detail

struct Rect {
    double x0, y0, x1, y1;
};

/// Right-triangle split of an nx-by-ny grid with alternating diagonals.
/// Boundary groups: left/right/top/bottom (corners belong to both sides).
inline std::pair<MeshTopology, MeshState> generate_structured_mesh(int nx, int ny, const Rect& bbox) {
    if (nx < 1 || ny < 1) throw InvalidInput("generate_structured_mesh: nx, ny must be >= 1");
    if (!(bbox.x1 > bbox.x0) || !(bbox.y1 > bbox.y0))
        throw InvalidInput("generate_structured_mesh: degenerate bounding box");
    MeshTopology topo;
    MeshState state;
    topo.node_count = (nx + 1) * (ny + 1);
    state.reference_coords.resize(topo.node_count);
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            state.reference_coords[id(i, j)] = Vec2(bbox.x0 + (bbox.x1 - bbox.x0) * i / nx,
                                                    bbox.y0 + (bbox.y1 - bbox.y0) * j / ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            int n00 = id(i, j), n10 = id(i + 1, j), n11 = id(i + 1, j + 1), n01 = id(i, j + 1);
            if ((i + j) % 2 == 0) {
                topo.triangles.push_back({n00, n10, n11});
                topo.triangles.push_back({n00, n11, n01});
            } else {
                topo.triangles.push_back({n00, n10, n01});
                topo.triangles.push_back({n10, n11, n01});
            }
        }
    }
    auto& tags = topo.dirichlet_tags;
    for (int j = 0; j <= ny; ++j) {
        tags["left"].push_back(id(0, j));
        tags["right"].push_back(id(nx, j));
    }
    for (int i = 0; i <= nx; ++i) {
        tags["bottom"].push_back(id(i, 0));
        tags["top"].push_back(id(i, ny));
    }
    detail::finalize_topology(topo);
    detail::finalize_state(topo, state);
    return {std::move(topo), std::move(state)};
}

/// Polar structured triangulation of a closed ring. Boundary groups inner/outer.
inline std::pair<MeshTopology, MeshState> generate_annulus_mesh(int nr, int ntheta, double r_in,
                                                                double r_out) {
    if (!(r_in > 0.0) || !(r_out > r_in)) throw InvalidInput("generate_annulus_mesh: need 0 < r_in < r_out");
    if (nr < 1 || ntheta < 3) throw InvalidInput("generate_annulus_mesh: need nr >= 1, ntheta >= 3");
    MeshTopology topo;
    MeshState state;
    topo.node_count = (nr + 1) * ntheta;
    state.reference_coords.resize(topo.node_count);
    auto id = [ntheta](int i, int j) { return i * ntheta + (j % ntheta); };
    for (int i = 0; i <= nr; ++i) {
        double r = r_in + (r_out - r_in) * i / nr;
        for (int j = 0; j < ntheta; ++j) {
            double th = 2.0 * M_PI * j / ntheta;
            state.reference_coords[id(i, j)] = Vec2(r * std::cos(th), r * std::sin(th));
        }
    }
    // Inner boundary nodes sit at |X0| = r_in exactly up to cos/sin rounding;
    // rescale so the invariant holds bitwise.
    for (int j = 0; j < ntheta; ++j) {
        Vec2& p = state.reference_coords[id(0, j)];
        double n = p.norm();
        if (n > 0) p *= r_in / n;
    }
    for (int i = 0; i < nr; ++i) {
        for (int j = 0; j < ntheta; ++j) {
            int n00 = id(i, j), n10 = id(i + 1, j), n11 = id(i + 1, j + 1), n01 = id(i, j + 1);
            if ((i + j) % 2 == 0) {
                topo.triangles.push_back({n00, n10, n11});
                topo.triangles.push_back({n00, n11, n01});
            } else {
                topo.triangles.push_back({n00, n10, n01});
                topo.triangles.push_back({n10, n11, n01});
            }
        }
    }
    for (int j = 0; j < ntheta; ++j) {
        topo.dirichlet_tags["inner"].push_back(id(0, j));
        topo.dirichlet_tags["outer"].push_back(id(nr, j));
    }
    detail::finalize_topology(topo);
    detail::finalize_state(topo, state);
    return {std::move(topo), std::move(state)};
}

/// Per-element ALE kinematics with the clamped Jacobian. grad(i) is the
/// current-configuration gradient of hat function i, evaluated with the
/// clamped area so zero-measure elements stay finite.
struct ElementKinematics {
    Eigen::Matrix2d F;
    double J = 1.0;
    double J_clamped = 1.0;
    std::array<Vec2, 3> shape_grad; // current-config gradients of the 3 hat functions

    Vec2 grad(const std::array<double, 3>& nodal) const {
        return nodal[0] * shape_grad[0] + nodal[1] * shape_grad[1] + nodal[2] * shape_grad[2];
    }
};

/// J <- max(|J|, A_tol/A0) * sign(J), with sign(0) = +1.
inline double clamp_jacobian(double J, double A_tol, double A0) {
    double floor = A_tol / A0;
    double s = (J < 0.0) ? -1.0 : 1.0;
    return std::max(std::abs(J), floor) * s;
}

inline ElementKinematics element_kinematics(const MeshTopology& topo, const MeshState& state,
                                            int triangle_id, double A_tol);

struct PointLocation {
    int triangle_id;
    std::array<double, 3> barycentric;
};

/// Brute-force containing-triangle query against the given coordinates.
/// Degenerate/inverted elements are skipped; lowest triangle id wins on edges.
inline PointLocation locate_point(const MeshTopology& topo, const std::vector<Vec2>& coords,
                                  const Vec2& p) {
    const double tol = 1e-12;
    for (size_t t = 0; t < topo.triangles.size(); ++t) {
        const auto& tri = topo.triangles[t];
        const Vec2& a = coords[tri[0]];
        const Vec2& b = coords[tri[1]];
        const Vec2& c = coords[tri[2]];
        double A = signed_area(a, b, c);
        if (A <= 0.0) continue;
        double l0 = signed_area(p, b, c) / A;
        double l1 = signed_area(a, p, c) / A;
        double l2 = signed_area(a, b, p) / A;
        if (l0 >= -tol && l1 >= -tol && l2 >= -tol) {
            l0 = std::clamp(l0, 0.0, 1.0);
            l1 = std::clamp(l1, 0.0, 1.0);
            l2 = std::clamp(l2, 0.0, 1.0);
            double s = l0 + l1 + l2;
            return {static_cast<int>(t), {l0 / s, l1 / s, l2 / s}};
        }
    }
    throw NotFound("locate_point: point outside all triangles");
}

inline PointLocation locate_point(const MeshTopology& topo, const MeshState& state, const Vec2& p) {
    return locate_point(topo, state.current_coords, p);
}

/// Kinematics from an explicit coordinate array (the mesh may carry several
/// configurations of the same topology during a time step).
inline ElementKinematics element_kinematics(const MeshTopology& topo, const MeshState& ref,
                                            const std::vector<Vec2>& cur_coords, int triangle_id,
                                            double A_tol) {
    const auto& tri = topo.triangles.at(triangle_id);
    const Vec2& a0 = ref.reference_coords[tri[0]];
    const Vec2& b0 = ref.reference_coords[tri[1]];
    const Vec2& c0 = ref.reference_coords[tri[2]];
    const Vec2& a = cur_coords[tri[0]];
    const Vec2& b = cur_coords[tri[1]];
    const Vec2& c = cur_coords[tri[2]];

    Eigen::Matrix2d D0, D;
    D0.col(0) = b0 - a0;
    D0.col(1) = c0 - a0;
    D.col(0) = b - a;
    D.col(1) = c - a;

    ElementKinematics kin;
    kin.F = D * D0.inverse();
    kin.J = kin.F.determinant();
    kin.J_clamped = clamp_jacobian(kin.J, A_tol, ref.reference_areas[triangle_id]);
    double two_area = 2.0 * kin.J_clamped * ref.reference_areas[triangle_id];
    kin.shape_grad[0] = Vec2(b.y() - c.y(), c.x() - b.x()) / two_area;
    kin.shape_grad[1] = Vec2(c.y() - a.y(), a.x() - c.x()) / two_area;
    kin.shape_grad[2] = Vec2(a.y() - b.y(), b.x() - a.x()) / two_area;
    return kin;
}

inline ElementKinematics element_kinematics(const MeshTopology& topo, const MeshState& state,
                                            int triangle_id, double A_tol) {
    return element_kinematics(topo, state, state.current_coords, triangle_id, A_tol);
}

/// FNV-1a over the adjacency arrays; constant for the whole life of a run.
inline std::uint64_t topology_hash(const MeshTopology& topo) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        for (int k = 0; k < 8; ++k) {
            h ^= (v >> (8 * k)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    mix(static_cast<std::uint64_t>(topo.node_count));
    for (const auto& t : topo.triangles)
        for (int n : t) mix(static_cast<std::uint64_t>(n));
    for (const auto& e : topo.edges)
        for (int n : e) mix(static_cast<std::uint64_t>(n));
    return h;
}

} // namespace xmesh
