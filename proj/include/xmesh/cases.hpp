#pragma once

#include <filesystem>
#include <limits>

#include "xmesh/analytic.hpp"
#include "xmesh/config.hpp"
#include "xmesh/msh_reader.hpp"
#include "xmesh/output.hpp"
#include "xmesh/solver.hpp"

namespace xmesh {

enum class CaseKind { StraightFront, AxisymEasy, AxisymHard, RotatingSinks };
enum class DtScheduleKind { Constant, SqrtOfTime, Implicit };

inline std::string to_string(CaseKind k) {
    switch (k) {
    case CaseKind::StraightFront: return "straight_front";
    case CaseKind::AxisymEasy: return "axisym_easy";
    case CaseKind::AxisymHard: return "axisym_hard";
    case CaseKind::RotatingSinks: return "rotating_sinks";
    }
    throw InvalidInput("unknown case kind");
}
inline CaseKind case_kind_from_string(const std::string& s) {
    if (s == "straight_front") return CaseKind::StraightFront;
    if (s == "axisym_easy") return CaseKind::AxisymEasy;
    if (s == "axisym_hard") return CaseKind::AxisymHard;
    if (s == "rotating_sinks") return CaseKind::RotatingSinks;
    throw ParseError("unknown case kind: '" + s + "'");
}
inline std::string to_string(DtScheduleKind k) {
    switch (k) {
    case DtScheduleKind::Constant: return "constant";
    case DtScheduleKind::SqrtOfTime: return "sqrt";
    case DtScheduleKind::Implicit: return "implicit";
    }
    throw InvalidInput("unknown schedule kind");
}
inline DtScheduleKind schedule_from_string(const std::string& s) {
    if (s == "constant") return DtScheduleKind::Constant;
    if (s == "sqrt") return DtScheduleKind::SqrtOfTime;
    if (s == "implicit") return DtScheduleKind::Implicit;
    throw ParseError("unknown schedule kind: '" + s + "'");
}

inline std::string to_string(SchemeKind k) {
    switch (k) {
    case SchemeKind::Auto: return "auto";
    case SchemeKind::QuasiNewton: return "quasi_newton";
    case SchemeKind::FixedPoint: return "fixed_point";
    }
    throw InvalidInput("unknown scheme kind");
}
inline SchemeKind scheme_from_string(const std::string& s) {
    if (s == "auto") return SchemeKind::Auto;
    if (s == "quasi_newton") return SchemeKind::QuasiNewton;
    if (s == "fixed_point") return SchemeKind::FixedPoint;
    throw ParseError("unknown scheme kind: '" + s + "'");
}

/// Everything needed to reproduce one simulation run.
struct CaseConfig {
    CaseKind kind = CaseKind::StraightFront;
    double element_size = 0.01;   // [m], target edge length for generated meshes
    std::string mesh_path;        // optional MSH override (square cases)
    MaterialProperties props = MaterialProperties::ice_water();
    SolverConfig solver;
    DtScheduleKind schedule = DtScheduleKind::SqrtOfTime;
    double dt_param = 100.0;      // dt [s] (constant) | beta [s] (sqrt) | first dt [s] (implicit)
    double t0 = 500.0;            // [s]
    double t_max = 16848.0;       // [s]
    double T_s = 263.0;           // cold wall / solid-side temperature [K]
    double T_l = 293.0;           // hot side / initial liquid temperature [K]
    double sink_intensity = 0.0;  // [W/m] per sink (axisym hard, rotating)
    double orbit_radius = 0.0;    // [m] (rotating sinks)
    double orbit_period = 0.0;    // [s] (rotating sinks)
    std::string out_dir;
    int vtk_every = 0;            // 0 disables snapshots
};

inline CaseConfig parse_case_config(const Config& c) {
    CaseConfig cfg;
    cfg.kind = case_kind_from_string(c.get_string("case.kind"));
    cfg.element_size = c.get_double("mesh.element_size", cfg.element_size);
    cfg.mesh_path = c.get_string("mesh.path", "");
    cfg.props.rho = c.get_double("material.rho", cfg.props.rho);
    cfg.props.c_s = c.get_double("material.c_s", cfg.props.c_s);
    cfg.props.c_l = c.get_double("material.c_l", cfg.props.c_l);
    cfg.props.k_s = c.get_double("material.k_s", cfg.props.k_s);
    cfg.props.k_l = c.get_double("material.k_l", cfg.props.k_l);
    cfg.props.l = c.get_double("material.latent", cfg.props.l);
    cfg.props.T0 = c.get_double("material.T0", cfg.props.T0);
    cfg.solver.scheme = scheme_from_string(c.get_string("solver.scheme", to_string(cfg.solver.scheme)));
    cfg.solver.theta = c.get_double("solver.theta", cfg.solver.theta);
    cfg.solver.delta = c.get_double("solver.delta", cfg.solver.delta);
    cfg.solver.epsilon = c.get_double("solver.epsilon", cfg.solver.epsilon);
    cfg.solver.A_tol = c.get_double("solver.A_tol", cfg.solver.A_tol);
    cfg.solver.max_iterations = c.get_int("solver.max_iterations", cfg.solver.max_iterations);
    cfg.solver.relax_keep = c.get_double("solver.relax_keep", cfg.solver.relax_keep);
    cfg.solver.relax_pull = c.get_double("solver.relax_pull", cfg.solver.relax_pull);
    cfg.solver.newton_plus_sign = c.get_bool("solver.newton_plus_sign", cfg.solver.newton_plus_sign);
    cfg.solver.shortest_edge = c.get_bool("solver.shortest_edge", cfg.solver.shortest_edge);
    cfg.schedule = schedule_from_string(c.get_string("time.schedule", to_string(cfg.schedule)));
    cfg.dt_param = c.get_double("time.dt_param", cfg.dt_param);
    cfg.t0 = c.get_double("time.t0", cfg.t0);
    cfg.t_max = c.get_double("time.t_max", cfg.t_max);
    cfg.T_s = c.get_double("bc.T_s", cfg.T_s);
    cfg.T_l = c.get_double("bc.T_l", cfg.T_l);
    cfg.sink_intensity = c.get_double("sinks.intensity", cfg.sink_intensity);
    cfg.orbit_radius = c.get_double("sinks.orbit_radius", cfg.orbit_radius);
    cfg.orbit_period = c.get_double("sinks.period", cfg.orbit_period);
    cfg.out_dir = c.get_string("output.dir", "");
    cfg.vtk_every = c.get_int("output.vtk_every", 0);
    if (!(cfg.t0 < cfg.t_max)) throw InvalidInput("case config: requires t0 < t_max");
    return cfg;
}

inline Config case_to_config(const CaseConfig& cfg) {
    Config c;
    c.set_string("case.kind", to_string(cfg.kind));
    c.set_double("mesh.element_size", cfg.element_size);
    if (!cfg.mesh_path.empty()) c.set_string("mesh.path", cfg.mesh_path);
    c.set_double("material.rho", cfg.props.rho);
    c.set_double("material.c_s", cfg.props.c_s);
    c.set_double("material.c_l", cfg.props.c_l);
    c.set_double("material.k_s", cfg.props.k_s);
    c.set_double("material.k_l", cfg.props.k_l);
    c.set_double("material.latent", cfg.props.l);
    c.set_double("material.T0", cfg.props.T0);
    c.set_string("solver.scheme", to_string(cfg.solver.scheme));
    c.set_double("solver.theta", cfg.solver.theta);
    c.set_double("solver.delta", cfg.solver.delta);
    c.set_double("solver.epsilon", cfg.solver.epsilon);
    c.set_double("solver.A_tol", cfg.solver.A_tol);
    c.set_int("solver.max_iterations", cfg.solver.max_iterations);
    c.set_double("solver.relax_keep", cfg.solver.relax_keep);
    c.set_double("solver.relax_pull", cfg.solver.relax_pull);
    c.set_bool("solver.newton_plus_sign", cfg.solver.newton_plus_sign);
    c.set_bool("solver.shortest_edge", cfg.solver.shortest_edge);
    c.set_string("time.schedule", to_string(cfg.schedule));
    c.set_double("time.dt_param", cfg.dt_param);
    c.set_double("time.t0", cfg.t0);
    c.set_double("time.t_max", cfg.t_max);
    c.set_double("bc.T_s", cfg.T_s);
    c.set_double("bc.T_l", cfg.T_l);
    c.set_double("sinks.intensity", cfg.sink_intensity);
    c.set_double("sinks.orbit_radius", cfg.orbit_radius);
    c.set_double("sinks.period", cfg.orbit_period);
    if (!cfg.out_dir.empty()) c.set_string("output.dir", cfg.out_dir);
    c.set_int("output.vtk_every", cfg.vtk_every);
    return c;
}

/// Mean x (planar) or mean distance to the origin (radial) of the front
/// nodes. NaN signals "no front" (legal during nucleation/annihilation).
inline double numerical_front_position(const FrontState& front, const StepState& state,
                                       bool radial) {
    if (front.empty()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (int i : front.nodes) sum += radial ? state.coords[i].norm() : state.coords[i].x();
    return sum / front.size();
}

/// A fully initialized simulation: mesh, initial state on C, and the loads.
struct CaseSetup {
    MeshTopology topo;
    MeshState ref;
    StepState state;
    FrontState front;
    StepProblem prob;
    bool radial = false;
    std::function<double(double)> exact_front; // null when no oracle exists
};

namespace detail {

inline std::vector<int> boundary_group(const MeshTopology& topo, const std::string& name) {
    auto it = topo.dirichlet_tags.find(name);
    if (it == topo.dirichlet_tags.end()) throw NotFound("boundary group missing: " + name);
    return it->second;
}

inline void impose_dirichlet_values(const MeshTopology&, const MeshState& ref, StepState& state,
                                    const std::vector<DirichletBC>& bcs) {
    for (const auto& bc : bcs)
        for (int i : bc.nodes) state.temps[i] = bc.value(state.time, ref.reference_coords[i]);
}

/// Shared initialization tail: sample the initial field, then relay the mesh
/// so the front lies exactly on mesh edges before the first step.
inline void initialize_on_front(CaseSetup& s, const SolverConfig& solver, double T0) {
    std::vector<bool> frozen = dirichlet_flags(s.topo, s.prob.bcs);
    ProjectionOptions opts;
    opts.shortest_edge = solver.shortest_edge;
    opts.frozen = &frozen;
    s.front = project_on_C(s.topo, s.state, FrontState{}, s.state.temps, T0, opts);
}

} // namespace detail

/// Square domain, planar front moving left to right. Cold wall on the left,
/// exact-solution temperature on the right, insulated top and bottom.
inline CaseSetup build_straight_front(const CaseConfig& cfg) {
    CaseSetup s;
    const double L = 0.1;
    if (!cfg.mesh_path.empty()) {
        std::ifstream in(cfg.mesh_path);
        if (!in) throw NotFound("mesh file not found: " + cfg.mesh_path);
        auto [topo, ref] = parse_msh(in);
        s.topo = std::move(topo);
        s.ref = std::move(ref);
    } else {
        int n = std::max(1, static_cast<int>(std::lround(L / cfg.element_size)));
        auto [topo, ref] = generate_structured_mesh(n, n, Rect{0.0, 0.0, L, L});
        s.topo = std::move(topo);
        s.ref = std::move(ref);
    }
    PlanarSolution sol = make_planar_solution(cfg.props, cfg.T_s, cfg.T_l);
    s.prob.props = cfg.props;
    s.prob.bcs.push_back({detail::boundary_group(s.topo, "left"),
                          [Ts = cfg.T_s](double, const Vec2&) { return Ts; }});
    s.prob.bcs.push_back({detail::boundary_group(s.topo, "right"),
                          [sol, L](double t, const Vec2&) { return exact_planar(L, t, sol); }});
    s.state.coords = s.ref.reference_coords;
    s.state.time = cfg.t0;
    s.state.temps.resize(s.topo.node_count);
    for (int i = 0; i < s.topo.node_count; ++i)
        s.state.temps[i] = exact_planar(s.ref.reference_coords[i].x(), cfg.t0, sol);
    s.exact_front = [sol](double t) { return planar_front_position(t, sol); };
    detail::initialize_on_front(s, cfg.solver, cfg.props.T0);
    return s;
}

/// Ring domain, radial front; the exact axisymmetric solution drives both
/// the inner and the outer boundary.
inline CaseSetup build_axisym_easy(const CaseConfig& cfg) {
    CaseSetup s;
    s.radial = true;
    const double r_in = 0.01, r_out = 0.1;
    int nr = std::max(1, static_cast<int>(std::lround((r_out - r_in) / cfg.element_size)));
    int ntheta = std::max(3, static_cast<int>(std::lround(2.0 * M_PI * 0.5 * (r_in + r_out) /
                                                          cfg.element_size)));
    auto [topo, ref] = generate_annulus_mesh(nr, ntheta, r_in, r_out);
    s.topo = std::move(topo);
    s.ref = std::move(ref);
    AxisymSolution sol{solve_phi_axisym(cfg.props, cfg.sink_intensity, cfg.T_l), cfg.props,
                       cfg.sink_intensity, cfg.T_l};
    s.prob.props = cfg.props;
    auto exact_bc = [sol](double t, const Vec2& X0) { return exact_axisym(X0.norm(), t, sol); };
    s.prob.bcs.push_back({detail::boundary_group(s.topo, "inner"), exact_bc});
    s.prob.bcs.push_back({detail::boundary_group(s.topo, "outer"), exact_bc});
    s.state.coords = s.ref.reference_coords;
    s.state.time = cfg.t0;
    s.state.temps.resize(s.topo.node_count);
    for (int i = 0; i < s.topo.node_count; ++i)
        s.state.temps[i] = exact_axisym(s.ref.reference_coords[i].norm(), cfg.t0, sol);
    s.exact_front = [sol](double t) { return 2.0 * sol.phi * std::sqrt(sol.props.alpha_s() * t); };
    detail::initialize_on_front(s, cfg.solver, cfg.props.T0);
    return s;
}

/// Square domain with a Dirac sink at the center. Starts from a uniform
/// liquid with no front; the solver must nucleate one.
inline CaseSetup build_axisym_hard(const CaseConfig& cfg) {
    CaseSetup s;
    s.radial = true;
    const double L = 3.0;
    int n = std::max(1, static_cast<int>(std::lround(L / cfg.element_size)));
    auto [topo, ref] = generate_structured_mesh(n, n, Rect{-L / 2, -L / 2, L / 2, L / 2});
    s.topo = std::move(topo);
    s.ref = std::move(ref);
    AxisymSolution sol{solve_phi_axisym(cfg.props, cfg.sink_intensity, cfg.T_l), cfg.props,
                       cfg.sink_intensity, cfg.T_l};
    s.prob.props = cfg.props;
    s.prob.sinks.push_back({Vec2(0.0, 0.0), cfg.sink_intensity, 0.0, 0.0, 0.0});
    auto exact_bc = [sol](double t, const Vec2& X0) {
        return t > 0.0 ? exact_axisym(X0.norm(), t, sol) : sol.T_l;
    };
    std::vector<int> outer;
    for (const char* g : {"left", "right", "bottom", "top"})
        for (int i : detail::boundary_group(s.topo, g)) outer.push_back(i);
    std::sort(outer.begin(), outer.end());
    outer.erase(std::unique(outer.begin(), outer.end()), outer.end());
    s.prob.bcs.push_back({outer, exact_bc});
    s.state.coords = s.ref.reference_coords;
    s.state.time = cfg.t0;
    s.state.temps = Eigen::VectorXd::Constant(s.topo.node_count, cfg.T_l);
    s.exact_front = [sol](double t) { return 2.0 * sol.phi * std::sqrt(sol.props.alpha_s() * t); };
    // uniform liquid: nothing to project, empty front
    return s;
}

/// Square domain, two orbiting Dirac sinks, constant-temperature boundary.
inline CaseSetup build_rotating_sinks(const CaseConfig& cfg) {
    CaseSetup s;
    const double L = 3.0;
    int n = std::max(1, static_cast<int>(std::lround(L / cfg.element_size)));
    auto [topo, ref] = generate_structured_mesh(n, n, Rect{-L / 2, -L / 2, L / 2, L / 2});
    s.topo = std::move(topo);
    s.ref = std::move(ref);
    s.prob.props = cfg.props;
    s.prob.sinks.push_back(
        {Vec2(0.0, 0.0), cfg.sink_intensity, cfg.orbit_radius, cfg.orbit_period, 0.0});
    s.prob.sinks.push_back(
        {Vec2(0.0, 0.0), cfg.sink_intensity, cfg.orbit_radius, cfg.orbit_period, M_PI});
    std::vector<int> outer;
    for (const char* g : {"left", "right", "bottom", "top"})
        for (int i : detail::boundary_group(s.topo, g)) outer.push_back(i);
    std::sort(outer.begin(), outer.end());
    outer.erase(std::unique(outer.begin(), outer.end()), outer.end());
    s.prob.bcs.push_back({outer, [Tl = cfg.T_l](double, const Vec2&) { return Tl; }});
    s.state.coords = s.ref.reference_coords;
    s.state.time = cfg.t0;
    s.state.temps = Eigen::VectorXd::Constant(s.topo.node_count, cfg.T_l);
    return s;
}

inline CaseSetup build_case(const CaseConfig& cfg) {
    switch (cfg.kind) {
    case CaseKind::StraightFront: return build_straight_front(cfg);
    case CaseKind::AxisymEasy: return build_axisym_easy(cfg);
    case CaseKind::AxisymHard: return build_axisym_hard(cfg);
    case CaseKind::RotatingSinks: return build_rotating_sinks(cfg);
    }
    throw InvalidInput("unknown case kind");
}

namespace detail {

struct FrontSnapshot {
    std::vector<std::vector<int>> comps;
    std::vector<Vec2> coords;
};

inline double component_distance(const std::vector<int>& a, const std::vector<Vec2>& ca,
                                 const std::vector<int>& b, const std::vector<Vec2>& cb) {
    double best = std::numeric_limits<double>::infinity();
    for (int i : a)
        for (int j : b) best = std::min(best, (ca[i] - cb[j]).norm());
    return best;
}

/// Classifies topology changes of the front by spatially matching the
/// connected components before and after a step.
inline void append_front_events(double t, const FrontSnapshot& prev, const FrontSnapshot& cur,
                                double match_radius, std::vector<std::string>& events) {
    const size_t np = prev.comps.size(), nc = cur.comps.size();
    std::vector<int> prev_matches(np, 0), cur_matches(nc, 0);
    for (size_t p = 0; p < np; ++p)
        for (size_t c = 0; c < nc; ++c)
            if (component_distance(prev.comps[p], prev.coords, cur.comps[c], cur.coords) <
                match_radius) {
                ++prev_matches[p];
                ++cur_matches[c];
            }
    auto stamp = [t](const char* kind) {
        std::ostringstream os;
        os << "t=" << t << "s: " << kind;
        return os.str();
    };
    for (size_t c = 0; c < nc; ++c)
        if (cur_matches[c] == 0) events.push_back(stamp("nucleation"));
    for (size_t c = 0; c < nc; ++c)
        if (cur_matches[c] >= 2) events.push_back(stamp("coalescence"));
    for (size_t p = 0; p < np; ++p)
        if (prev_matches[p] == 0) events.push_back(stamp("annihilation"));
}

} // namespace detail

/// Advances a prepared case to t_max, recording one sample per accepted step
/// plus the initial instant. Throws NonConvergence when a step exhausts its
/// iteration budget.
inline TimeSeries run_case_loop(CaseSetup& s, const CaseConfig& cfg) {
    TimeSeries series;
    const double match_radius = 3.0 * cfg.element_size;
    auto sample_xi = [&](double pos, double t) {
        if (!s.exact_front || std::isnan(pos)) return std::numeric_limits<double>::quiet_NaN();
        double exact = s.exact_front(t);
        if (!(exact > 0.0)) throw InvalidInput("front error: exact position not positive");
        return std::abs(pos - exact) / exact;
    };
    double pos0 = numerical_front_position(s.front, s.state, s.radial);
    series.samples.push_back({s.state.time, pos0, sample_xi(pos0, s.state.time), 0, 0.0});

    const bool snapshots = cfg.vtk_every > 0 && !cfg.out_dir.empty();
    if (snapshots) {
        std::filesystem::create_directories(cfg.out_dir);
        auto fields = make_vtk_fields(s.topo, s.ref, s.state, cfg.props.T0, cfg.solver.A_tol);
        write_vtk(s.topo, s.state, fields, vtk_snapshot_path(cfg.out_dir, to_string(cfg.kind), 0));
    }

    int step = 0;
    while (s.state.time < cfg.t_max * (1.0 - 1e-12)) {
        double t = s.state.time;
        double dt;
        switch (cfg.schedule) {
        case DtScheduleKind::Constant: dt = cfg.dt_param; break;
        case DtScheduleKind::SqrtOfTime: dt = timestep_sqrt(cfg.dt_param, t); break;
        case DtScheduleKind::Implicit: dt = timestep_implicit(cfg.dt_param, t); break;
        }
        dt = std::min(dt, cfg.t_max - t);

        detail::FrontSnapshot before{front_components(s.topo, s.front), s.state.coords};
        StepResult res = advance_time_step(s.topo, s.ref, s.state, s.front, dt, cfg.solver, s.prob);
        if (!res.report.converged)
            throw NonConvergence("step at t=" + std::to_string(t) + "s did not converge in " +
                                 std::to_string(cfg.solver.max_iterations) + " iterations (err=" +
                                 std::to_string(res.report.err_history.back()) + " K)");
        s.state = std::move(res.state);
        s.front = std::move(res.front);
        ++step;

        detail::FrontSnapshot after{front_components(s.topo, s.front), s.state.coords};
        detail::append_front_events(s.state.time, before, after, match_radius, series.events);

        double pos = numerical_front_position(s.front, s.state, s.radial);
        series.samples.push_back({s.state.time, pos, sample_xi(pos, s.state.time),
                                  res.report.iterations, res.report.err_history.back()});
        if (snapshots && step % cfg.vtk_every == 0) {
            auto fields = make_vtk_fields(s.topo, s.ref, s.state, cfg.props.T0, cfg.solver.A_tol);
            write_vtk(s.topo, s.state, fields,
                      vtk_snapshot_path(cfg.out_dir, to_string(cfg.kind), step));
        }
    }
    return series;
}

inline TimeSeries run_case(const CaseConfig& cfg) {
    CaseSetup s = build_case(cfg);
    return run_case_loop(s, cfg);
}

/// Time-integrated relative front error over the recorded samples; samples
/// without a front (NaN position) are skipped.
inline double series_xi_bar(const TimeSeries& series, const std::function<double(double)>& exact) {
    std::vector<double> times, measured;
    for (const auto& smp : series.samples) {
        if (std::isnan(smp.front_pos)) continue;
        times.push_back(smp.time);
        measured.push_back(smp.front_pos);
    }
    return front_error(times, measured, exact).xi_bar;
}

struct SweepRow {
    double element_size;
    double xi_bar;
};
struct SweepResult {
    std::vector<SweepRow> rows;
    double slope = std::numeric_limits<double>::quiet_NaN(); // log-log fit, NaN if < 2 distinct sizes
};

/// Runs the case once per element size and fits the log-log convergence
/// slope of the integrated front error.
inline SweepResult convergence_sweep(const CaseConfig& base, const std::vector<double>& sizes) {
    if (sizes.size() < 2) throw InvalidInput("convergence_sweep: needs at least 2 element sizes");
    SweepResult out;
    for (double h : sizes) {
        CaseConfig cfg = base;
        cfg.element_size = h;
        CaseSetup s = build_case(cfg);
        if (!s.exact_front) throw InvalidInput("convergence_sweep: case has no exact solution");
        TimeSeries series = run_case_loop(s, cfg);
        out.rows.push_back({h, series_xi_bar(series, s.exact_front)});
    }
    // least-squares fit of log(xi_bar) against log(h) over distinct sizes
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    std::set<double> seen;
    for (const auto& row : out.rows) {
        if (!seen.insert(row.element_size).second) continue;
        double x = std::log(row.element_size), y = std::log(row.xi_bar);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n >= 2) out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return out;
}

struct RelaySample {
    double t;
    double max_front_residual;  // max |f| over front nodes after projection
    bool compatible;
    int inverted_elements;
};
struct RelayDemoResult {
    std::vector<RelaySample> samples;
    std::vector<StepState> snapshots;
    std::vector<FrontState> fronts;
    bool persistent_inversion = false; // an element inverted through the final sample
    MeshTopology topo;
    MeshState ref;
};

/// Pure mesh-relay demonstration on a prescribed rotating linear field
/// f(x, y, t) = y cos t + x sin t with iso-zero at angle t through the
/// origin. No PDE is solved; each sample projects then relaxes.
inline RelayDemoResult run_relay_demo(int n = 10, int n_samples = 20, bool anti = false) {
    RelayDemoResult out;
    auto [topo, ref] = generate_structured_mesh(n, n, Rect{-0.5, -0.5, 0.5, 0.5});
    out.topo = std::move(topo);
    out.ref = std::move(ref);
    auto f = [](const Vec2& x, double t) { return x.y() * std::cos(t) + x.x() * std::sin(t); };

    StepState state;
    state.coords = out.ref.reference_coords;
    state.temps.resize(out.topo.node_count);
    FrontState front;
    Eigen::VectorXd temps_prev;
    ProjectionOptions opts;
    opts.anti_relay = anti;
    opts.max_passes = anti ? 1 : 3; // the failure demo must not be rescued

    std::vector<int> inverted_since(out.topo.triangles.size(), -1);
    for (int k = 0; k < n_samples; ++k) {
        double t = (M_PI / 5.0) * k / (n_samples - 1);
        for (int i = 0; i < out.topo.node_count; ++i) state.temps[i] = f(state.coords[i], t);
        temps_prev = k == 0 ? state.temps : temps_prev;
        try {
            front = project_on_C(out.topo, state, front, temps_prev, 0.0, opts);
        } catch (const Error&) {
            if (!anti) throw; // only the failure demo may stay incompatible
        }
        relax_in_C(out.topo, state, out.ref.reference_coords, front);

        RelaySample smp;
        smp.t = t;
        smp.max_front_residual = 0.0;
        for (int i : front.nodes)
            smp.max_front_residual = std::max(smp.max_front_residual, std::abs(f(state.coords[i], t)));
        smp.compatible = is_compatible(out.topo, state.temps, 0.0);
        smp.inverted_elements = 0;
        for (size_t e = 0; e < out.topo.triangles.size(); ++e) {
            const auto& tri = out.topo.triangles[e];
            double A = signed_area(state.coords[tri[0]], state.coords[tri[1]], state.coords[tri[2]]);
            // zero-measure elements are legitimate; roundoff on collinear
            // nodes gives O(eps) negative areas that are not inversions
            if (A < -1e-12 * out.ref.reference_areas[e]) {
                ++smp.inverted_elements;
                if (inverted_since[e] < 0) inverted_since[e] = k;
            } else {
                inverted_since[e] = -1;
            }
        }
        out.samples.push_back(smp);
        out.snapshots.push_back(state);
        out.fronts.push_back(front);
        temps_prev = state.temps;
    }
    for (size_t e = 0; e < inverted_since.size(); ++e)
        if (inverted_since[e] >= 0 && inverted_since[e] < n_samples - 1)
            out.persistent_inversion = true;
    return out;
}

} // namespace xmesh
