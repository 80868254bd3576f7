#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "xmesh/mesh.hpp"
#include "xmesh/physics.hpp"

namespace xmesh {

/// Nodal positions plus temperatures at one instant.
struct StepState {
    std::vector<Vec2> coords;
    Eigen::VectorXd temps;
    double time = 0.0;
};

/// Point heat sink; a nonzero orbit radius makes it circle the orbit center.
struct DiracSink {
    Vec2 orbit_center{0.0, 0.0};
    double intensity = 0.0;    // Q [W/m], positive for a sink
    double orbit_radius = 0.0; // [m]
    double period = 0.0;       // [s]
    double phase0 = 0.0;       // [rad]

    Vec2 position(double t) const {
        if (orbit_radius == 0.0 || period == 0.0) return orbit_center;
        double ang = phase0 + 2.0 * M_PI * t / period;
        return orbit_center + orbit_radius * Vec2(std::cos(ang), std::sin(ang));
    }
};

struct DirichletBC {
    std::vector<int> nodes;
    // value(t, X0): prescribed temperature at a node with reference position X0
    std::function<double(double, const Vec2&)> value;
};

struct SparseSystem {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
};

/// How the energy/conductivity laws enter an assembly pass.
enum class LawMode {
    Sharp,        // true discontinuous laws (residual)
    Regularized,  // delta-ramped laws (quasi-Newton tangent)
    ElementFixed, // phase frozen per element from its centroid temperature
};

using VolumetricSource = std::function<double(const Vec2&, double)>; // S(x, t) [W/kg]

namespace detail {

// mid-edge quadrature, degree-2 exact, weights 1/3; avoids sampling at nodes
inline constexpr std::array<std::array<double, 3>, 3> kQuadBary = {{
    {0.5, 0.5, 0.0},
    {0.0, 0.5, 0.5},
    {0.5, 0.0, 0.5},
}};

struct LawEval {
    double e, k, de, dk;
};

/// Laws at one quadrature point for a given mode. centroid_T is only used by
/// ElementFixed, where the phase of the whole element is frozen.
inline LawEval evaluate_laws(double T, double centroid_T, const MaterialProperties& p,
                             const RegularizationParams& reg, LawMode mode) {
    switch (mode) {
        case LawMode::Sharp:
            return {internal_energy(T, p), conductivity(T, p),
                    T <= p.T0 ? p.c_s : p.c_l, 0.0};
        case LawMode::Regularized: {
            RegularizedLaws r = regularized_laws(T, p, reg);
            return {r.e, r.k, r.de_dT, r.dk_dT};
        }
        case LawMode::ElementFixed: {
            bool liquid = centroid_T > p.T0;
            double c = liquid ? p.c_l : p.c_s;
            double off = liquid ? p.l_bar() : 0.0;
            double k = liquid ? p.k_l : p.k_s;
            return {c * T + off, k, c, 0.0};
        }
    }
    return {};
}

} // namespace detail

/// Barycentric distribution of a Dirac sink onto the element containing it,
/// located against the given (current) coordinates. Loads sum to -Q.
inline std::array<std::pair<int, double>, 3> sink_contribution(const DiracSink& sink,
                                                               const MeshTopology& topo,
                                                               const std::vector<Vec2>& coords,
                                                               double t) {
    PointLocation loc = locate_point(topo, coords, sink.position(t));
    const auto& tri = topo.triangles[loc.triangle_id];
    std::array<std::pair<int, double>, 3> loads;
    for (int k = 0; k < 3; ++k)
        loads[k] = {tri[k], -sink.intensity * loc.barycentric[k]};
    return loads;
}

/// Nodal residual of the theta-scheme ALE weak form, over all nodes.
/// The sharp laws make this the true residual; other modes exist for the
/// fixed-point variant and for testing the tangent against its own residual.
inline Eigen::VectorXd assemble_residual(const MeshTopology& topo, const MeshState& ref,
                                         const StepState& state_n, const StepState& state_np1,
                                         double theta, double dt, const MaterialProperties& props,
                                         const std::vector<DiracSink>& sinks, double A_tol,
                                         LawMode mode = LawMode::Sharp,
                                         const RegularizationParams& reg = {1.0},
                                         const VolumetricSource& source = nullptr) {
    const int n = topo.node_count;
    if (state_n.temps.size() != n || state_np1.temps.size() != n ||
        static_cast<int>(state_n.coords.size()) != n || static_cast<int>(state_np1.coords.size()) != n)
        throw InvalidInput("assemble_residual: state sizes do not match topology");
    if (!(dt > 0.0)) throw InvalidInput("assemble_residual: dt must be positive");

    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    const double rho = props.rho;

    for (size_t t = 0; t < topo.triangles.size(); ++t) {
        const auto& tri = topo.triangles[t];
        ElementKinematics kin1 = element_kinematics(topo, ref, state_np1.coords, static_cast<int>(t), A_tol);
        ElementKinematics kin0 = element_kinematics(topo, ref, state_n.coords, static_cast<int>(t), A_tol);
        const double A0 = ref.reference_areas[t];
        const double m1 = A0 * kin1.J_clamped / 3.0; // quadrature measure, new instant
        const double m0 = A0 * kin0.J_clamped / 3.0;

        std::array<double, 3> T1{}, T0v{};
        std::array<Vec2, 3> w{};
        for (int k = 0; k < 3; ++k) {
            T1[k] = state_np1.temps[tri[k]];
            T0v[k] = state_n.temps[tri[k]];
            w[k] = (state_np1.coords[tri[k]] - state_n.coords[tri[k]]) / dt;
        }
        double Tc1 = (T1[0] + T1[1] + T1[2]) / 3.0;
        double Tc0 = (T0v[0] + T0v[1] + T0v[2]) / 3.0;
        Vec2 gT1 = kin1.grad(T1);
        Vec2 gT0 = kin0.grad(T0v);

        for (const auto& q : detail::kQuadBary) {
            double Tq1 = q[0] * T1[0] + q[1] * T1[1] + q[2] * T1[2];
            double Tq0 = q[0] * T0v[0] + q[1] * T0v[1] + q[2] * T0v[2];
            Vec2 wq = q[0] * w[0] + q[1] * w[1] + q[2] * w[2];
            auto law1 = detail::evaluate_laws(Tq1, Tc1, props, reg, mode);
            auto law0 = detail::evaluate_laws(Tq0, Tc0, props, reg, LawMode::Sharp);

            for (int k = 0; k < 3; ++k) {
                int i = tri[k];
                // energy difference, fused so identical states cancel exactly
                r[i] += rho * q[k] * (m1 * law1.e - m0 * law0.e);
                // diffusion, both instants
                r[i] += theta * dt * m1 * law1.k * gT1.dot(kin1.shape_grad[k]);
                r[i] += (1.0 - theta) * dt * m0 * law0.k * gT0.dot(kin0.shape_grad[k]);
                // mesh advection
                r[i] += theta * dt * m1 * rho * law1.e * wq.dot(kin1.shape_grad[k]);
                r[i] += (1.0 - theta) * dt * m0 * rho * law0.e * wq.dot(kin0.shape_grad[k]);
            }
            if (source) {
                Vec2 xq1 = q[0] * state_np1.coords[tri[0]] + q[1] * state_np1.coords[tri[1]] +
                           q[2] * state_np1.coords[tri[2]];
                Vec2 xq0 = q[0] * state_n.coords[tri[0]] + q[1] * state_n.coords[tri[1]] +
                           q[2] * state_n.coords[tri[2]];
                for (int k = 0; k < 3; ++k) {
                    int i = tri[k];
                    r[i] -= theta * dt * m1 * rho * source(xq1, state_np1.time) * q[k];
                    r[i] -= (1.0 - theta) * dt * m0 * rho * source(xq0, state_n.time) * q[k];
                }
            }
        }
    }

    for (const auto& sink : sinks) {
        auto loads1 = sink_contribution(sink, topo, state_np1.coords, state_np1.time);
        for (const auto& [i, load] : loads1) r[i] -= theta * dt * load;
        auto loads0 = sink_contribution(sink, topo, state_n.coords, state_n.time);
        for (const auto& [i, load] : loads0) r[i] -= (1.0 - theta) * dt * load;
    }
    return r;
}

/// Exact derivative of the mode's residual with respect to the nodal
/// temperatures of state_np1, coordinates held fixed.
inline Eigen::SparseMatrix<double> assemble_tangent(const MeshTopology& topo, const MeshState& ref,
                                                    const StepState& state_n,
                                                    const StepState& state_np1, double theta,
                                                    double dt, const MaterialProperties& props,
                                                    const RegularizationParams& reg, double A_tol,
                                                    LawMode mode = LawMode::Regularized) {
    const int n = topo.node_count;
    if (state_np1.temps.size() != n || static_cast<int>(state_np1.coords.size()) != n)
        throw InvalidInput("assemble_tangent: state sizes do not match topology");

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(topo.triangles.size() * 9);
    const double rho = props.rho;

    for (size_t t = 0; t < topo.triangles.size(); ++t) {
        const auto& tri = topo.triangles[t];
        ElementKinematics kin1 = element_kinematics(topo, ref, state_np1.coords, static_cast<int>(t), A_tol);
        const double m1 = ref.reference_areas[t] * kin1.J_clamped / 3.0;

        std::array<double, 3> T1{};
        std::array<Vec2, 3> w{};
        for (int k = 0; k < 3; ++k) {
            T1[k] = state_np1.temps[tri[k]];
            w[k] = (state_np1.coords[tri[k]] - state_n.coords[tri[k]]) / dt;
        }
        double Tc1 = (T1[0] + T1[1] + T1[2]) / 3.0;
        Vec2 gT1 = kin1.grad(T1);

        Eigen::Matrix3d Ae = Eigen::Matrix3d::Zero();
        for (const auto& q : detail::kQuadBary) {
            double Tq1 = q[0] * T1[0] + q[1] * T1[1] + q[2] * T1[2];
            Vec2 wq = q[0] * w[0] + q[1] * w[1] + q[2] * w[2];
            auto law = detail::evaluate_laws(Tq1, Tc1, props, reg, mode);
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    double v = 0.0;
                    // capacity
                    v += m1 * rho * law.de * q[b] * q[a];
                    // diffusion: k dgT/dT_b and dk/dT_b gT
                    v += theta * dt * m1 *
                         (law.k * kin1.shape_grad[b].dot(kin1.shape_grad[a]) +
                          law.dk * q[b] * gT1.dot(kin1.shape_grad[a]));
                    // advection
                    v += theta * dt * m1 * rho * law.de * q[b] * wq.dot(kin1.shape_grad[a]);
                    Ae(a, b) += v;
                }
            }
        }
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) trips.emplace_back(tri[a], tri[b], Ae(a, b));
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

struct ReducedSystem {
    SparseSystem system;
    std::vector<int> free_nodes; // row/col i of system corresponds to free_nodes[i]
};

/// Eliminates constrained rows/columns; prescribed values move to the rhs.
inline ReducedSystem apply_dirichlet(const Eigen::SparseMatrix<double>& A,
                                     const Eigen::VectorXd& rhs,
                                     const std::vector<bool>& constrained,
                                     const Eigen::VectorXd& prescribed) {
    const int n = static_cast<int>(constrained.size());
    std::vector<int> new_index(n, -1);
    ReducedSystem out;
    for (int i = 0; i < n; ++i) {
        if (!constrained[i]) {
            new_index[i] = static_cast<int>(out.free_nodes.size());
            out.free_nodes.push_back(i);
        }
    }
    const int m = static_cast<int>(out.free_nodes.size());
    out.system.rhs = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) out.system.rhs[i] = rhs[out.free_nodes[i]];

    std::vector<Eigen::Triplet<double>> trips;
    for (int col = 0; col < A.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it) {
            int i = static_cast<int>(it.row()), j = col;
            if (!constrained[i] && !constrained[j])
                trips.emplace_back(new_index[i], new_index[j], it.value());
            else if (!constrained[i] && constrained[j])
                out.system.rhs[new_index[i]] -= it.value() * prescribed[j];
        }
    }
    out.system.matrix.resize(m, m);
    out.system.matrix.setFromTriplets(trips.begin(), trips.end());
    return out;
}

} // namespace xmesh
