#pragma once

#include <Eigen/SparseLU>

#include "xmesh/assembly.hpp"
#include "xmesh/front.hpp"

namespace xmesh {

// Iteration scheme for a time step. Auto selects FixedPoint when the material
// has no latent heat (the residual is then linear once each element's phase is
// frozen) and QuasiNewton otherwise.
enum class SchemeKind { Auto, QuasiNewton, FixedPoint };

struct SolverConfig {
    SchemeKind scheme = SchemeKind::Auto;
    double theta = 0.5;       // time scheme parameter
    double delta = 12.0;      // tangent regularization width [K]
    double epsilon = 1e-5;    // convergence tolerance [K]
    double A_tol = 5e-9;      // Jacobian clamp area floor [m2]
    int max_iterations = 150;
    double relax_keep = 0.9;
    double relax_pull = 0.1;
    // Literal "T' = T + Delta" reading of the update; the default subtracts,
    // which is the reading that solves a linear problem in one step.
    bool newton_plus_sign = false;
    bool shortest_edge = true; // target selection by edge length (travel distance otherwise)
};

struct StepReport {
    int iterations = 0;
    std::vector<double> err_history;
    bool converged = false;
    int front_node_count = 0;
};

/// The physical problem a time step advances: material, loads and BCs.
struct StepProblem {
    MaterialProperties props;
    std::vector<DiracSink> sinks;
    std::vector<DirichletBC> bcs;
    VolumetricSource source; // optional; all shipped cases use Dirac sinks only
};

/// Direct sparse LU with column pivoting-capable ordering.
inline Eigen::VectorXd solve_linear(const SparseSystem& system) {
    if (system.matrix.rows() == 0) return Eigen::VectorXd();
    Eigen::SparseMatrix<double> A = system.matrix;
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
        throw SolverError("solve_linear: factorization failed (" + lu.lastErrorMessage() + ")");
    Eigen::VectorXd x = lu.solve(system.rhs);
    if (lu.info() != Eigen::Success) throw SolverError("solve_linear: back substitution failed");
    return x;
}

/// Newton-style update helper; sign convention per SolverConfig.
inline Eigen::VectorXd sign_update_correction(const Eigen::VectorXd& T, const Eigen::VectorXd& delta,
                                              bool plus_sign = false) {
    return plus_sign ? Eigen::VectorXd(T + delta) : Eigen::VectorXd(T - delta);
}

namespace detail {

/// Weighted RMS of the P1 interpolant of the nodal corrections over the
/// reference domain, with the current (clamped) Jacobian as weight.
inline double correction_norm(const MeshTopology& topo, const MeshState& ref,
                              const std::vector<Vec2>& coords, const Eigen::VectorXd& delta,
                              double A_tol) {
    double num = 0.0, den = 0.0;
    for (size_t t = 0; t < topo.triangles.size(); ++t) {
        const auto& tri = topo.triangles[t];
        ElementKinematics kin = element_kinematics(topo, ref, coords, static_cast<int>(t), A_tol);
        double m = ref.reference_areas[t] * kin.J_clamped / 3.0;
        for (const auto& q : kQuadBary) {
            double dq = q[0] * delta[tri[0]] + q[1] * delta[tri[1]] + q[2] * delta[tri[2]];
            num += m * dq * dq;
        }
        den += ref.reference_areas[t];
    }
    return std::sqrt(std::max(num, 0.0) / den);
}

inline std::vector<bool> dirichlet_flags(const MeshTopology& topo, const std::vector<DirichletBC>& bcs) {
    std::vector<bool> flags(topo.node_count, false);
    for (const auto& bc : bcs)
        for (int i : bc.nodes) flags[i] = true;
    return flags;
}

} // namespace detail

struct StepResult {
    StepState state;
    FrontState front;
    StepReport report;
};

namespace detail {

inline StepResult run_step_impl(const MeshTopology& topo, const MeshState& ref,
                                const StepState& state_n, const FrontState& front_n, double dt,
                                const SolverConfig& cfg, const StepProblem& prob, LawMode tangent_mode) {
    StepResult out;
    out.state = state_n;
    out.state.time = state_n.time + dt;
    out.front = front_n;
    relax_in_C(topo, out.state, ref.reference_coords, front_n, cfg.relax_keep, cfg.relax_pull);

    std::vector<bool> constrained = dirichlet_flags(topo, prob.bcs);
    for (const auto& bc : prob.bcs)
        for (int i : bc.nodes) out.state.temps[i] = bc.value(out.state.time, ref.reference_coords[i]);

    RegularizationParams reg{cfg.delta};
    ProjectionOptions popts;
    popts.shortest_edge = cfg.shortest_edge;
    popts.frozen = &constrained;
    std::map<int, int> relay_edges; // per-step edge memory, shared across iterations
    popts.sticky = &relay_edges;


    // The fixed-point variant freezes each element's phase at its centroid
    // temperature, which makes the residual linear; one solve per iteration.
    LawMode residual_mode = tangent_mode == LawMode::ElementFixed ? LawMode::ElementFixed
                                                                  : LawMode::Sharp;
    for (int k = 0; k < cfg.max_iterations; ++k) {
        Eigen::VectorXd r = assemble_residual(topo, ref, state_n, out.state, cfg.theta, dt,
                                              prob.props, prob.sinks, cfg.A_tol, residual_mode, reg,
                                              prob.source);
        Eigen::SparseMatrix<double> A = assemble_tangent(topo, ref, state_n, out.state, cfg.theta,
                                                         dt, prob.props, reg, cfg.A_tol, tangent_mode);
        ReducedSystem red = apply_dirichlet(A, r, constrained,
                                            Eigen::VectorXd::Zero(topo.node_count));
        Eigen::VectorXd delta_free = solve_linear(red.system);
        Eigen::VectorXd delta = Eigen::VectorXd::Zero(topo.node_count);
        for (size_t i = 0; i < red.free_nodes.size(); ++i) delta[red.free_nodes[i]] = delta_free[i];

        Eigen::VectorXd updated = sign_update_correction(out.state.temps, delta, cfg.newton_plus_sign);
        for (int i = 0; i < topo.node_count; ++i)
            if (!constrained[i]) out.state.temps[i] = updated[i];

        // Project onto the evolving front, not the step-n front: a node the
        // previous iteration placed on the interface must stay in S1 so it
        // re-pins itself (zero travel) when its temperature drifts off T0.
        // Otherwise the neighbour behind it sees a spurious crossed edge and
        // chases it along the edge, piling nodes up at column hand-offs.
        out.front = project_on_C(topo, out.state, out.front, state_n.temps, prob.props.T0, popts);

        double err = correction_norm(topo, ref, out.state.coords, delta, cfg.A_tol);
        out.report.err_history.push_back(err);
        out.report.iterations = k + 1;
        if (err < cfg.epsilon) {
            out.report.converged = true;
            break;
        }
    }
    out.report.front_node_count = out.front.size();
    return out;
}

} // namespace detail

/// One time step of the quasi-Newton scheme: relax, then alternate a tangent
/// solve on the sharp residual with a projection on C until the correction
/// norm drops below epsilon.
inline StepResult run_time_step(const MeshTopology& topo, const MeshState& ref,
                                const StepState& state_n, const FrontState& front_n, double dt,
                                const SolverConfig& cfg, const StepProblem& prob) {
    return detail::run_step_impl(topo, ref, state_n, front_n, dt, cfg, prob, LawMode::Regularized);
}

/// Fixed-point variant. Robust only for zero latent heat; with latent heat
/// the front tends to oscillate and the step reports non-convergence.
inline StepResult fixed_point_step(const MeshTopology& topo, const MeshState& ref,
                                   const StepState& state_n, const FrontState& front_n, double dt,
                                   const SolverConfig& cfg, const StepProblem& prob) {
    return detail::run_step_impl(topo, ref, state_n, front_n, dt, cfg, prob, LawMode::ElementFixed);
}

/// Dispatches per cfg.scheme; Auto selects the fixed point when the material
/// has no latent heat and the quasi-Newton scheme otherwise.
inline StepResult advance_time_step(const MeshTopology& topo, const MeshState& ref,
                                    const StepState& state_n, const FrontState& front_n, double dt,
                                    const SolverConfig& cfg, const StepProblem& prob) {
    bool fixed_point = cfg.scheme == SchemeKind::FixedPoint ||
                       (cfg.scheme == SchemeKind::Auto && prob.props.l == 0.0);
    return fixed_point ? fixed_point_step(topo, ref, state_n, front_n, dt, cfg, prob)
                       : run_time_step(topo, ref, state_n, front_n, dt, cfg, prob);
}

/// Variable time step giving a constant front advance for sqrt-of-time fronts.
inline double timestep_sqrt(double beta, double t_n) {
    if (!(beta > 0.0) || !(t_n > 0.0))
        throw InvalidInput("timestep_sqrt: needs beta > 0 and t_n > 0 (use timestep_implicit at t = 0)");
    return std::sqrt(beta * t_n);
}

/// Implicit variant usable from t = 0; beta is replaced by the first step size.
inline double timestep_implicit(double dt_first, double t_n) {
    if (!(dt_first > 0.0) || t_n < 0.0) throw InvalidInput("timestep_implicit: bad arguments");
    return dt_first * (1.0 + std::sqrt(1.0 + 4.0 * t_n / dt_first)) / 2.0;
}

} // namespace xmesh
