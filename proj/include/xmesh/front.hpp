#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "xmesh/assembly.hpp"
#include "xmesh/mesh.hpp"

namespace xmesh {

/// Nodes currently carrying the phase-change front. Every member holds the
/// transition temperature bitwise.
struct FrontState {
    std::set<int> nodes;

    bool contains(int i) const { return nodes.count(i) > 0; }
    bool empty() const { return nodes.empty(); }
    int size() const { return static_cast<int>(nodes.size()); }
};

/// Edges whose endpoint temperatures strictly straddle T0.
inline std::vector<int> crossed_edges(const MeshTopology& topo, const Eigen::VectorXd& temps,
                                      double T0) {
    std::vector<int> out;
    for (size_t e = 0; e < topo.edges.size(); ++e) {
        double a = temps[topo.edges[e][0]] - T0;
        double b = temps[topo.edges[e][1]] - T0;
        if (a * b < 0.0) out.push_back(static_cast<int>(e));
    }
    return out;
}

/// Compatibility C: the transition temperature occurs only at nodes.
inline bool is_compatible(const MeshTopology& topo, const Eigen::VectorXd& temps, double T0) {
    return crossed_edges(topo, temps, T0).empty();
}

struct RelaySets {
    std::set<int> s1;     // previous front plus strict sign changes
    std::set<int> s2;     // endpoints of currently crossed edges
    std::set<int> active; // s1 intersect s2
};

/// A node changes sign only when it sits strictly on one side of T0 at both
/// instants; nodes at exactly T0 contribute to S1 through front membership only.
inline RelaySets relay_sets(const FrontState& front_prev, const Eigen::VectorXd& temps_prev,
                            const Eigen::VectorXd& temps_cur, double T0,
                            const MeshTopology& topo) {
    RelaySets rs;
    rs.s1 = front_prev.nodes;
    for (int i = 0; i < topo.node_count; ++i) {
        if (temps_prev[i] != T0 && temps_cur[i] != T0 &&
            (temps_prev[i] > T0) != (temps_cur[i] > T0))
            rs.s1.insert(i);
    }
    for (int e : crossed_edges(topo, temps_cur, T0)) {
        rs.s2.insert(topo.edges[e][0]);
        rs.s2.insert(topo.edges[e][1]);
    }
    for (int i : rs.s1)
        if (rs.s2.count(i)) rs.active.insert(i);
    return rs;
}

struct FrontTarget {
    int edge;
    double s;      // crossing parameter in (0,1) measured from the active node
    Vec2 point;    // crossing point in current coordinates
    double travel; // distance from the node's current position
};

namespace detail {

inline std::optional<FrontTarget> target_on_edge(int node, int edge, const MeshTopology& topo,
                                                 const std::vector<Vec2>& coords,
                                                 const Eigen::VectorXd& temps, double T0) {
    int other = topo.edges[edge][0] == node ? topo.edges[edge][1] : topo.edges[edge][0];
    double Tn = temps[node], To = temps[other];
    if ((Tn - T0) * (To - T0) >= 0.0) return std::nullopt;
    double s = (T0 - Tn) / (To - Tn);
    Vec2 point = coords[node] + s * (coords[other] - coords[node]);
    return FrontTarget{edge, s, point, (point - coords[node]).norm()};
}

} // namespace detail

/// All crossed incident edges of a node, best first. Boundary nodes only
/// consider boundary edges (the domain shape never changes). The default
/// criterion is the current edge length: it depends on geometry only, so
/// small temperature noise at near-transition nodes cannot flip the choice
/// between near-tied crossings and push nodes sideways along the front.
/// With shortest_edge off, selection falls back to the travel distance to
/// the crossing point.
inline std::vector<FrontTarget> candidate_targets(int node, const Eigen::VectorXd& temps, double T0,
                                                  const MeshTopology& topo,
                                                  const std::vector<Vec2>& coords,
                                                  bool shortest_edge = true) {
    std::vector<FrontTarget> cands;
    for (int e : topo.node_edges[node]) {
        auto t = detail::target_on_edge(node, e, topo, coords, temps, T0);
        if (t) cands.push_back(*t);
    }
    if (cands.empty()) return cands;
    if (topo.is_boundary_node[node]) {
        // the domain shape must not change: boundary nodes only ever move
        // along boundary edges
        std::vector<FrontTarget> boundary;
        for (const auto& c : cands)
            if (topo.is_boundary_edge(c.edge)) boundary.push_back(c);
        cands = std::move(boundary);
    }
    auto key = [&](const FrontTarget& t) {
        if (!shortest_edge) return t.travel;
        const auto& e = topo.edges[t.edge];
        return (coords[e[0]] - coords[e[1]]).norm();
    };
    std::stable_sort(cands.begin(), cands.end(), [&](const FrontTarget& a, const FrontTarget& b) {
        double ka = key(a), kb = key(b);
        return ka < kb || (ka == kb && a.edge < b.edge);
    });
    return cands;
}

/// Best target of an active node, if any crossed incident edge exists.
inline std::optional<FrontTarget> choose_target(int node, const Eigen::VectorXd& temps, double T0,
                                                const MeshTopology& topo,
                                                const std::vector<Vec2>& coords,
                                                bool shortest_edge = true) {
    auto cands = candidate_targets(node, temps, T0, topo, coords, shortest_edge);
    if (cands.empty()) return std::nullopt;
    return cands.front();
}

struct RelayAction {
    int pass;
    int node;
    int edge;
    Vec2 from;
    Vec2 to;
};

struct ProjectionOptions {
    bool anti_relay = false;   // pick active nodes downstream (failure demo)
    bool shortest_edge = true;
    int max_passes = 3;
    const std::vector<bool>* frozen = nullptr; // nodes that must not move (Dirichlet)
    std::vector<RelayAction>* log = nullptr;   // optional trace of node moves
    // Optional per-node edge memory (in/out). A node whose remembered edge is
    // still crossed keeps riding it instead of re-optimizing; switching edges
    // mid-iteration restarts the nonlinear iteration's contraction, so the
    // caller shares one map across the iterations of a time step.
    std::map<int, int>* sticky = nullptr;
};

/// Moves active nodes along mesh edges onto the iso-T0 and pins their
/// temperature to exactly T0. Mutates state in place; returns the new front.
///
/// Targets are computed from the pre-pass field; active nodes are processed
/// in ascending id. When both endpoints of a crossed edge select it, the
/// smaller travel distance wins and the loser waits for the next pass. If
/// crossed edges survive a pass, further passes widen S1 to all nodes (at
/// most max_passes).
inline FrontState project_on_C(const MeshTopology& topo, StepState& state,
                               const FrontState& front_prev, const Eigen::VectorXd& temps_prev,
                               double T0, const ProjectionOptions& opts = {}) {
    std::set<int> moved;
    for (int pass = 0; pass < opts.max_passes; ++pass) {
        auto crossed = crossed_edges(topo, state.temps, T0);
        if (crossed.empty()) break;

        RelaySets rs = relay_sets(front_prev, temps_prev, state.temps, T0, topo);
        // front nodes placed earlier in this call keep relaying across passes
        for (int i : moved) rs.s1.insert(i);
        // Nodes placed on the front earlier in this *step* (sticky keys) also
        // stay relay-eligible. A front node whose temperature drifts across T0
        // between projections would otherwise drop out of S1 for good, and the
        // neighbour behind it would be forced to resolve the crossing by
        // walking the whole edge and stacking onto it.
        if (opts.sticky)
            for (const auto& [n, e] : *opts.sticky) rs.s1.insert(n);
        std::set<int> active;
        if (pass == 0) {
            if (opts.anti_relay) {
                for (int i : rs.s2)
                    if (!rs.s1.count(i)) active.insert(i);
            } else {
                for (int i : rs.s1)
                    if (rs.s2.count(i)) active.insert(i);
            }
        } else {
            active = rs.s2; // rescue pass: S1 widened to all nodes
        }
        if (opts.frozen)
            for (auto it = active.begin(); it != active.end();)
                it = (*opts.frozen)[*it] ? active.erase(it) : std::next(it);
        if (active.empty()) continue;

        // snapshot targets from the pre-pass field
        std::map<int, std::vector<FrontTarget>> cands;
        for (int i : active) {
            auto list = candidate_targets(i, state.temps, T0, topo, state.coords, opts.shortest_edge);
            // the baton is passed downstream: prefer edges whose far endpoint
            // is not itself a front candidate. Edges between two
            // near-transition nodes carry spurious sign changes and would
            // slide nodes along the front instead of across it.
            std::vector<FrontTarget> down;
            for (const auto& t : list) {
                int other = topo.edges[t.edge][0] == i ? topo.edges[t.edge][1] : topo.edges[t.edge][0];
                if (!rs.s1.count(other)) down.push_back(t);
            }
            // Fallback when every crossing points at another front candidate:
            // accept only crossings in the node's own half of the edge
            // (s <= 1/2). A drifted front node re-pins itself with s near 0;
            // s near 1 means the far node owns the transition, and moving
            // there would stack this node on top of it and invert elements.
            // The last rescue pass drops the restriction: compatibility must
            // be reached, and by then the rightful owner has had its chance.
            if (down.empty())
                for (const auto& t : list)
                    if (t.s <= 0.5 || pass == opts.max_passes - 1) down.push_back(t);
            if (opts.sticky) {
                auto it = opts.sticky->find(i);
                if (it != opts.sticky->end()) {
                    auto pos = std::find_if(down.begin(), down.end(),
                                            [&](const FrontTarget& t) { return t.edge == it->second; });
                    if (pos != down.end()) std::rotate(down.begin(), pos, pos + 1);
                }
            }
            cands[i] = std::move(down);
        }

        // One node per edge: conflicts go to the smaller travel distance.
        // The loser does not chase its remaining candidates — those were
        // snapshotted before the winners move, so they may be stale. It
        // simply waits for the next pass, which recomputes crossed edges.
        std::map<int, int> edge_winner;  // edge -> node
        std::map<int, FrontTarget> assignment;
        for (int node : active) {
            if (cands[node].empty()) continue;
            const FrontTarget& t = cands[node].front();
            auto it = edge_winner.find(t.edge);
            if (it == edge_winner.end()) {
                edge_winner[t.edge] = node;
                assignment[node] = t;
                continue;
            }
            int other = it->second;
            if (t.travel < assignment.at(other).travel) {
                edge_winner[t.edge] = node;
                assignment[node] = t;
                assignment.erase(other);
            }
        }

        for (const auto& [node, target] : assignment) {
            if (opts.log)
                opts.log->push_back({pass, node, target.edge, state.coords[node], target.point});
            state.coords[node] = target.point;
            state.temps[node] = T0;
            moved.insert(node);
            if (opts.sticky) (*opts.sticky)[node] = target.edge;
        }
        // An empty assignment must not end the loop: later passes escalate
        // (S1 widens to all nodes, then the fallback restriction is lifted),
        // so a node blocked in this pass may still be movable in the next.
    }

    if (!crossed_edges(topo, state.temps, T0).empty())
        throw Error("project_on_C: compatibility not reached after " +
                    std::to_string(opts.max_passes) + " passes");

    FrontState out;
    for (int i : moved)
        if (state.temps[i] == T0) out.nodes.insert(i);
    for (int i : front_prev.nodes)
        if (state.temps[i] == T0) out.nodes.insert(i);
    return out;
}

/// Step initialization: non-front nodes relax toward their reference
/// position, front nodes and all temperatures stay put.
inline void relax_in_C(const MeshTopology& topo, StepState& state,
                       const std::vector<Vec2>& reference_coords, const FrontState& front,
                       double keep = 0.9, double pull = 0.1) {
    for (int i = 0; i < topo.node_count; ++i) {
        if (front.contains(i)) continue;
        state.coords[i] = keep * state.coords[i] + pull * reference_coords[i];
    }
}

/// Connected components of the front over mesh edges whose both endpoints
/// are front nodes. Used for nucleation/coalescence/annihilation bookkeeping.
inline std::vector<std::vector<int>> front_components(const MeshTopology& topo,
                                                      const FrontState& front) {
    std::map<int, int> parent;
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int i : front.nodes) parent[i] = i;
    for (size_t e = 0; e < topo.edges.size(); ++e) {
        int a = topo.edges[e][0], b = topo.edges[e][1];
        if (front.contains(a) && front.contains(b)) parent[find(a)] = find(b);
    }
    std::map<int, std::vector<int>> groups;
    for (int i : front.nodes) groups[find(i)].push_back(i);
    std::vector<std::vector<int>> out;
    for (auto& [root, nodes] : groups) out.push_back(std::move(nodes));
    return out;
}

} // namespace xmesh
