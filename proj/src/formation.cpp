#include "gridsplit/formation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <string>

#include "gridsplit/errors.hpp"

namespace gridsplit {

namespace {

std::string str(int v) { return std::to_string(v); }

void check_snapshot(const ZoneGraph& g, const FormationSnapshot& s) {
  const auto n = g.node_count();
  if (s.zone_load_kw.size() != n || s.zone_pv_kw.size() != n)
    throw ModelError("snapshot must carry one load and one PV value per zone");
  if (!s.pv_min_kw.empty() && s.pv_min_kw.size() != n) throw ModelError("snapshot pv_min size mismatch");
  if (!s.load_min_kw.empty() && s.load_min_kw.size() != n) throw ModelError("snapshot load_min size mismatch");
  if (!s.source_limit_kw.empty() && s.source_limit_kw.size() != g.gfm_nodes().size())
    throw ModelError("snapshot source_limit size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    const double pv_min = s.pv_min_kw.empty() ? 0.0 : s.pv_min_kw[i];
    const double load_min = s.load_min_kw.empty() ? 0.0 : s.load_min_kw[i];
    if (!(s.zone_load_kw[i] >= 0.0 && s.zone_pv_kw[i] >= 0.0 && pv_min >= 0.0 && load_min >= 0.0))
      throw ModelError("snapshot values must be nonnegative (zone " + str(g.nodes()[i].id) + ")");
    if (load_min > s.zone_load_kw[i] || pv_min > s.zone_pv_kw[i])
      throw ModelError("snapshot minimum exceeds maximum (zone " + str(g.nodes()[i].id) + ")");
  }
}

double source_limit(const ZoneGraph& g, const FormationSnapshot& s, std::size_t k) {
  const double rating = g.resource_at(g.gfm_nodes()[k]).source_power_kw();
  if (s.source_limit_kw.empty()) return rating;
  return std::clamp(s.source_limit_kw[k], 0.0, rating);
}

int microgrid_of(const std::vector<int>& gfms, int node_id) {
  for (std::size_t k = 0; k < gfms.size(); ++k)
    if (gfms[k] == node_id) return static_cast<int>(k);
  return -1;
}

int other_end(const SwitchEdge& e, int node) { return e.from == node ? e.to : e.from; }

}  // namespace

std::set<int> FormationSolution::closed_edges(const ZoneGraph& g) const {
  std::set<int> out;
  for (std::size_t e = 0; e < switch_status.size(); ++e)
    if (switch_status[e] != 0) out.insert(g.edges()[e].id);
  return out;
}

std::set<int> FormationSolution::members(const ZoneGraph& g, int microgrid) const {
  std::set<int> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] == microgrid) out.insert(g.nodes()[i].id);
  return out;
}

int branch_capacity(const ZoneGraph& g, int gfm_node, int edge_id) {
  const auto& e = g.edge(edge_id);
  if (g.is_faulted(edge_id)) return 0;
  const int start = other_end(e, gfm_node);
  if (g.node(start).has_gfm) return 0;
  std::set<int> seen{start};
  std::deque<int> queue{start};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (auto ei : g.incident(g.node_index(u))) {
      const auto& edge = g.edges()[ei];
      if (g.is_faulted(edge.id)) continue;
      const int v = other_end(edge, u);
      if (v == gfm_node || g.node(v).has_gfm || seen.contains(v)) continue;
      seen.insert(v);
      queue.push_back(v);
    }
  }
  return static_cast<int>(seen.size());
}

int branch_load(const ZoneGraph& g, const std::set<int>& closed, int gfm_node, int edge_id) {
  if (!closed.contains(edge_id)) return 0;
  const int start = other_end(g.edge(edge_id), gfm_node);
  std::set<int> seen{gfm_node, start};
  std::deque<int> queue{start};
  int count = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (auto ei : g.incident(g.node_index(u))) {
      const auto& edge = g.edges()[ei];
      if (!closed.contains(edge.id)) continue;
      const int v = other_end(edge, u);
      if (seen.contains(v)) continue;
      seen.insert(v);
      queue.push_back(v);
      ++count;
    }
  }
  return count;
}

FormationMilp build_milp(const ZoneGraph& g, const FormationSnapshot& snap, const FormationWeights& weights,
                         const FormationSolution* previous) {
  check_snapshot(g, snap);
  const auto gfms = g.gfm_nodes();
  if (gfms.empty()) throw ModelError("formation needs at least one grid-forming resource");
  if (!(weights.shed_weight > 0.0 && weights.default_flow_weight > 0.0 &&
        weights.critical_flow_weight > weights.default_flow_weight))
    throw ModelError("formation weights must satisfy critical > default > 0 and shed > 0");
  if (previous && previous->switch_status.size() != g.edge_count())
    throw ModelError("previous solution does not match the graph");

  for (const auto& p : g.lateral_policies()) {
    if (p.force_zero || p.min_downstream_nodes == 0) continue;
    const int cap = branch_capacity(g, p.gfm_node_id, p.edge_id);
    if (p.min_downstream_nodes > cap)
      throw InfeasibleTopology("lateral policy on edge " + str(p.edge_id) + " at GFM " + str(p.gfm_node_id) +
                               " needs " + str(p.min_downstream_nodes) + " downstream zones but the branch holds " +
                               str(cap));
  }

  const auto islands = island_nodes(g);
  const auto island_tree = island_spanning_edges(g);
  const std::size_t n = g.node_count();
  const std::size_t ne = g.edge_count();
  const std::size_t nk = gfms.size();
  const double big_m = static_cast<double>(n);

  FormationMilp out;
  auto& m = out.model;
  auto& v = out.vars;
  v.y.assign(ne, -1);
  v.x.assign(n, std::vector<int>(nk, -1));
  v.z.assign(ne, std::vector<int>(nk, -1));
  v.line_flow.assign(ne, -1);
  v.pv.assign(n, -1);
  v.load.assign(n, -1);
  v.source.assign(nk, -1);
  v.commodity_fwd.assign(ne, -1);
  v.commodity_rev.assign(ne, -1);
  v.gfm_commodity.assign(nk, -1);

  auto island_edge = [&](const SwitchEdge& e) { return islands.contains(e.from); };
  auto live_edge = [&](const SwitchEdge& e) { return !g.is_faulted(e.id) && !island_edge(e); };

  for (std::size_t e = 0; e < ne; ++e) {
    const auto& edge = g.edges()[e];
    v.y[e] = m.add_binary("y_" + str(edge.id));
    if (g.is_faulted(edge.id)) m.set_bounds(v.y[e], 0, 0);
    else if (island_edge(edge)) {
      const double fixed = island_tree.contains(edge.id) ? 1.0 : 0.0;
      m.set_bounds(v.y[e], fixed, fixed);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = g.nodes()[i];
    if (islands.contains(node.id)) continue;
    const int own = microgrid_of(gfms, node.id);
    for (std::size_t k = 0; k < nk; ++k) {
      v.x[i][k] = m.add_binary("x_" + str(node.id) + "_" + str(static_cast<int>(k) + 1));
      if (own >= 0) {
        const double pinned = own == static_cast<int>(k) ? 1.0 : 0.0;
        m.set_bounds(v.x[i][k], pinned, pinned);
      }
    }
  }
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& edge = g.edges()[e];
    if (!live_edge(edge)) continue;
    for (std::size_t k = 0; k < nk; ++k)
      v.z[e][k] = m.add_binary("z_" + str(edge.id) + "_" + str(static_cast<int>(k) + 1));
  }
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& edge = g.edges()[e];
    if (!live_edge(edge)) continue;
    v.line_flow[e] = m.add_variable("T_" + str(edge.id), -edge.flow_limit_kw, edge.flow_limit_kw);
  }

  double shed_constant = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    shed_constant += snap.zone_load_kw[i];
    const auto& node = g.nodes()[i];
    if (islands.contains(node.id)) continue;
    const double pv_min = snap.pv_min_kw.empty() ? 0.0 : snap.pv_min_kw[i];
    const double load_min = snap.load_min_kw.empty() ? 0.0 : snap.load_min_kw[i];
    v.pv[i] = m.add_variable("P_" + str(node.id), pv_min, snap.zone_pv_kw[i]);
    v.load[i] = m.add_variable("D_" + str(node.id), load_min, snap.zone_load_kw[i], false, -weights.shed_weight);
  }
  m.add_objective_constant(weights.shed_weight * shed_constant);
  for (std::size_t k = 0; k < nk; ++k)
    v.source[k] = m.add_variable("G_" + str(gfms[k]), 0.0, source_limit(g, snap, k));

  for (std::size_t e = 0; e < ne; ++e) {
    const auto& edge = g.edges()[e];
    if (!live_edge(edge)) continue;
    v.commodity_fwd[e] = m.add_variable("Fp_" + str(edge.id), 0.0, big_m, false, weights.flow_weight(g.node(edge.to)));
    v.commodity_rev[e] = m.add_variable("Fm_" + str(edge.id), 0.0, big_m, false, weights.flow_weight(g.node(edge.from)));
  }
  for (std::size_t k = 0; k < nk; ++k)
    v.gfm_commodity[k] = m.add_variable("W_" + str(gfms[k]), 0.0, static_cast<double>(n) - 1.0);

  if (previous) {
    const double eps = weights.switch_change_penalty;
    for (std::size_t e = 0; e < ne; ++e) {
      if (previous->switch_status[e] != 0) {
        m.add_cost(v.y[e], -eps);
        m.add_objective_constant(eps);
      } else {
        m.add_cost(v.y[e], eps);
      }
    }
  }

  // Every zone belongs to exactly one microgrid.
  for (std::size_t i = 0; i < n; ++i) {
    if (v.x[i][0] < 0) continue;
    std::vector<Term> row;
    for (std::size_t k = 0; k < nk; ++k) row.push_back({v.x[i][k], 1.0});
    m.add_constraint("assign_" + str(g.nodes()[i].id), row, Relation::Equal, 1.0);
  }

  // Closed switch <=> both ends in the same microgrid, z = x_f * x_t.
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& edge = g.edges()[e];
    if (!live_edge(edge)) continue;
    const auto fi = g.node_index(edge.from);
    const auto ti = g.node_index(edge.to);
    std::vector<Term> link{{v.y[e], 1.0}};
    for (std::size_t k = 0; k < nk; ++k) {
      const int z = v.z[e][k];
      link.push_back({z, -1.0});
      const std::string tag = str(edge.id) + "_" + str(static_cast<int>(k) + 1);
      m.add_constraint("mc_f_" + tag, {{z, 1.0}, {v.x[fi][k], -1.0}}, Relation::LessEqual, 0.0);
      m.add_constraint("mc_t_" + tag, {{z, 1.0}, {v.x[ti][k], -1.0}}, Relation::LessEqual, 0.0);
      m.add_constraint("mc_lo_" + tag, {{z, 1.0}, {v.x[fi][k], -1.0}, {v.x[ti][k], -1.0}}, Relation::GreaterEqual,
                       -1.0);
    }
    m.add_constraint("link_" + str(edge.id), link, Relation::Equal, 0.0);
  }

  // Transportation-model power balance and switch-gated line limits.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = g.nodes()[i];
    if (v.load[i] < 0) continue;
    std::vector<Term> row;
    for (auto e : g.incident(i)) {
      if (v.line_flow[e] < 0) continue;
      row.push_back({v.line_flow[e], g.edges()[e].from == node.id ? 1.0 : -1.0});
    }
    row.push_back({v.pv[i], -1.0});
    row.push_back({v.load[i], 1.0});
    if (const int k = microgrid_of(gfms, node.id); k >= 0) row.push_back({v.source[k], -1.0});
    m.add_constraint("balance_" + str(node.id), row, Relation::Equal, 0.0);
  }
  for (std::size_t e = 0; e < ne; ++e) {
    if (v.line_flow[e] < 0) continue;
    const auto& edge = g.edges()[e];
    m.add_constraint("tmax_" + str(edge.id), {{v.line_flow[e], 1.0}, {v.y[e], -edge.flow_limit_kw}},
                     Relation::LessEqual, 0.0);
    m.add_constraint("tmin_" + str(edge.id), {{v.line_flow[e], -1.0}, {v.y[e], -edge.flow_limit_kw}},
                     Relation::LessEqual, 0.0);
  }

  // Radiality count.
  out.radial_count = radial_edge_count(g);
  {
    std::vector<Term> row;
    for (std::size_t e = 0; e < ne; ++e) row.push_back({v.y[e], 1.0});
    m.add_constraint("radial", row, Relation::Equal, out.radial_count);
  }

  // Single-commodity flow: each ordinary zone consumes one unit, GFMs emit W.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = g.nodes()[i];
    if (islands.contains(node.id)) continue;
    std::vector<Term> row;
    for (auto e : g.incident(i)) {
      if (v.commodity_fwd[e] < 0) continue;
      const double sign = g.edges()[e].from == node.id ? 1.0 : -1.0;
      row.push_back({v.commodity_fwd[e], sign});
      row.push_back({v.commodity_rev[e], -sign});
    }
    if (const int k = microgrid_of(gfms, node.id); k >= 0) {
      row.push_back({v.gfm_commodity[k], -1.0});
      m.add_constraint("commodity_" + str(node.id), row, Relation::Equal, 0.0);
    } else {
      m.add_constraint("commodity_" + str(node.id), row, Relation::Equal, -1.0);
    }
  }
  for (std::size_t e = 0; e < ne; ++e) {
    if (v.commodity_fwd[e] < 0) continue;
    const auto id = str(g.edges()[e].id);
    m.add_constraint("fcap_p_" + id, {{v.commodity_fwd[e], 1.0}, {v.y[e], -big_m}}, Relation::LessEqual, 0.0);
    m.add_constraint("fcap_m_" + id, {{v.commodity_rev[e], 1.0}, {v.y[e], -big_m}}, Relation::LessEqual, 0.0);
  }

  // Lateral-length control on GFM-incident edges.
  for (const auto& p : g.lateral_policies()) {
    const auto e = g.edge_index(p.edge_id);
    if (v.commodity_fwd[e] < 0) continue;  // faulted: nothing can flow anyway
    if (p.force_zero) {
      m.set_bounds(v.commodity_fwd[e], 0.0, 0.0);
      m.set_bounds(v.commodity_rev[e], 0.0, 0.0);
      continue;
    }
    if (p.min_downstream_nodes == 0) continue;
    const double sign = g.edges()[e].from == p.gfm_node_id ? 1.0 : -1.0;
    m.add_constraint("lateral_" + str(p.gfm_node_id) + "_" + str(p.edge_id),
                     {{v.commodity_fwd[e], sign}, {v.commodity_rev[e], -sign}}, Relation::GreaterEqual,
                     p.min_downstream_nodes);
  }
  return out;
}

ObjectiveTerms formation_objective(const ZoneGraph& g, const FormationSnapshot& snap, const FormationWeights& weights,
                                   const FormationSolution& s, const FormationSolution* previous) {
  ObjectiveTerms t;
  for (std::size_t i = 0; i < g.node_count(); ++i) t.shed += snap.zone_load_kw[i] - s.served_load_kw[i];
  t.shed *= weights.shed_weight;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& edge = g.edges()[e];
    const double f = s.commodity_flow[e];
    t.flow += f >= 0 ? weights.flow_weight(g.node(edge.to)) * f : weights.flow_weight(g.node(edge.from)) * -f;
  }
  if (previous) {
    for (std::size_t e = 0; e < g.edge_count(); ++e)
      t.switching += weights.switch_change_penalty * std::abs(s.switch_status[e] - previous->switch_status[e]);
  }
  return t;
}

FormationSolution decode(const SolveReport& report, const FormationMilp& milp, const ZoneGraph& g,
                         const FormationSnapshot& snap, const FormationWeights& weights,
                         const FormationSolution* previous) {
  if (report.status != SolveStatus::Optimal) throw DecodeError("solver did not report an optimal solution");
  const auto& v = milp.vars;
  const auto& vals = report.values;
  constexpr double tol = 1e-6;
  auto binary = [&](int var) {
    const double r = std::round(vals.at(var));
    if (std::abs(vals[var] - r) > tol || (r != 0.0 && r != 1.0))
      throw DecodeError("variable " + milp.model.variable(var).name + " = " + std::to_string(vals[var]) +
                        " is not binary within tolerance");
    return static_cast<int>(r);
  };
  auto value = [&](int var) { return var < 0 ? 0.0 : vals.at(var); };

  const auto gfms = g.gfm_nodes();
  const std::size_t n = g.node_count();
  const std::size_t ne = g.edge_count();
  const std::size_t nk = gfms.size();

  FormationSolution s;
  s.switch_status.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) s.switch_status[e] = binary(v.y[e]);

  s.assignment.assign(n, -1);
  std::vector<std::vector<int>> x(n, std::vector<int>(nk, 0));
  for (std::size_t i = 0; i < n; ++i) {
    if (v.x[i][0] < 0) continue;
    int chosen = -1;
    for (std::size_t k = 0; k < nk; ++k) {
      x[i][k] = binary(v.x[i][k]);
      if (x[i][k] == 0) continue;
      if (chosen >= 0) throw DecodeError("zone " + str(g.nodes()[i].id) + " assigned to two microgrids");
      chosen = static_cast<int>(k);
    }
    if (chosen < 0) throw DecodeError("zone " + str(g.nodes()[i].id) + " assigned to no microgrid");
    s.assignment[i] = chosen;
  }
  for (std::size_t e = 0; e < ne; ++e) {
    if (v.z[e][0] < 0) continue;
    const auto& edge = g.edges()[e];
    const auto fi = g.node_index(edge.from);
    const auto ti = g.node_index(edge.to);
    int sum = 0;
    for (std::size_t k = 0; k < nk; ++k) {
      const int z = binary(v.z[e][k]);
      if (z != x[fi][k] * x[ti][k]) throw DecodeError("product linearization broken on edge " + str(edge.id));
      sum += z;
    }
    if (sum != s.switch_status[e]) throw DecodeError("switch/microgrid link broken on edge " + str(edge.id));
  }

  const auto census = is_radial_forest(g, s.closed_edges(g));
  if (!census.radial) throw DecodeError("decoded topology is not a radial forest: " + census.reason);
  for (std::size_t k = 0; k < nk; ++k)
    for (int id : census.trees[k].nodes)
      if (s.assignment[g.node_index(id)] != static_cast<int>(k))
        throw DecodeError("zone " + str(id) + " is assigned away from the tree it hangs off");

  s.served_load_kw.resize(n);
  s.pv_dispatch_kw.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.served_load_kw[i] = value(v.load[i]);
    s.pv_dispatch_kw[i] = value(v.pv[i]);
  }
  s.line_flow_kw.resize(ne);
  s.commodity_flow.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    s.line_flow_kw[e] = value(v.line_flow[e]);
    s.commodity_flow[e] = value(v.commodity_fwd[e]) - value(v.commodity_rev[e]);
  }
  s.source_kw.resize(nk);
  s.gfm_commodity.resize(nk);
  for (std::size_t k = 0; k < nk; ++k) {
    s.source_kw[k] = value(v.source[k]);
    s.gfm_commodity[k] = value(v.gfm_commodity[k]);
  }

  const auto terms = formation_objective(g, snap, weights, s, previous);
  s.load_shed_term = terms.shed;
  s.flow_term = terms.flow;
  s.switch_term = terms.switching;
  s.objective_value = terms.total();
  if (std::abs(s.objective_value - report.objective) > 1e-6 * (1.0 + std::abs(report.objective)))
    throw DecodeError("recomputed objective " + std::to_string(s.objective_value) + " differs from solver objective " +
                      std::to_string(report.objective));
  return s;
}

FormationSolution solve_formation(const ZoneGraph& g, const FormationSnapshot& snap, const FormationWeights& weights,
                                  const FormationSolution* previous, const SolverOptions& options) {
  const auto milp = build_milp(g, snap, weights, previous);
  const auto report = solve_milp(milp.model, options);
  switch (report.status) {
    case SolveStatus::Optimal: break;
    case SolveStatus::Infeasible:
      throw InfeasibleTopology("no radial partition satisfies the lateral policies (step " + str(snap.step_index) + ")");
    default:
      throw SolverLimit("formation solve stopped: " + to_string(report.status) + " after " +
                        std::to_string(report.node_count) + " nodes");
  }
  return decode(report, milp, g, snap, weights, previous);
}

FormationSolution fixed_topology_solution(const ZoneGraph& g, const std::optional<FormationSnapshot>& snap,
                                          const FormationWeights& weights) {
  if (snap) check_snapshot(g, *snap);
  const auto gfms = g.gfm_nodes();
  const auto closed = default_closed_edges(g);
  const std::size_t n = g.node_count();
  const std::size_t ne = g.edge_count();

  FormationSolution s;
  s.switch_status.assign(ne, 0);
  for (std::size_t e = 0; e < ne; ++e) s.switch_status[e] = closed.contains(g.edges()[e].id) ? 1 : 0;
  s.assignment.assign(n, -1);
  s.commodity_flow.assign(ne, 0.0);
  s.line_flow_kw.assign(ne, 0.0);
  s.served_load_kw.assign(n, 0.0);
  s.pv_dispatch_kw.assign(n, 0.0);
  s.source_kw.assign(gfms.size(), 0.0);
  s.gfm_commodity.assign(gfms.size(), 0.0);

  // Walk every component of the closed subgraph; a tree rooted at a GFM
  // yields the microgrid, its subtree sizes give the commodity flow.
  std::vector<int> seen(n, 0);
  auto walk = [&](int root, int k) {
    std::vector<int> order{root};
    std::map<int, std::size_t> parent_edge;
    std::set<int> tree{root};
    seen[g.node_index(root)] = 1;
    for (std::size_t head = 0; head < order.size(); ++head) {
      const int u = order[head];
      for (auto e : g.incident(g.node_index(u))) {
        const auto& edge = g.edges()[e];
        if (!closed.contains(edge.id)) continue;
        const auto pe = parent_edge.find(u);
        if (pe != parent_edge.end() && pe->second == e) continue;
        const int w = other_end(edge, u);
        if (tree.contains(w)) throw TopologyError("default topology contains a cycle through edge " + str(edge.id));
        if (k >= 0 && g.node(w).has_gfm)
          throw TopologyError("default topology joins GFMs " + str(root) + " and " + str(w));
        tree.insert(w);
        seen[g.node_index(w)] = 1;
        parent_edge[w] = e;
        order.push_back(w);
      }
    }
    if (k < 0) return;
    for (int id : tree) s.assignment[g.node_index(id)] = k;
    std::map<int, double> subtree;
    std::map<int, double> net_load;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int u = *it;
      const auto i = g.node_index(u);
      subtree[u] += 1.0;
      if (snap) net_load[u] += snap->zone_load_kw[i] - snap->zone_pv_kw[i];
      const auto pe = parent_edge.find(u);
      if (pe == parent_edge.end()) continue;
      const auto& edge = g.edges()[pe->second];
      const double sign = edge.to == u ? 1.0 : -1.0;  // parent -> u is positive when u is the head
      s.commodity_flow[pe->second] = sign * subtree[u];
      s.line_flow_kw[pe->second] = sign * net_load[u];
      const int parent = other_end(edge, u);
      subtree[parent] += subtree[u];
      net_load[parent] += net_load[u];
    }
    s.gfm_commodity[k] = static_cast<double>(tree.size() - 1);
    s.source_kw[k] = net_load[root];
  };
  for (std::size_t k = 0; k < gfms.size(); ++k) walk(gfms[k], static_cast<int>(k));
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) walk(g.nodes()[i].id, -1);

  if (snap) {
    for (std::size_t i = 0; i < n; ++i) {
      if (s.assignment[i] < 0) continue;
      s.served_load_kw[i] = snap->zone_load_kw[i];
      s.pv_dispatch_kw[i] = snap->zone_pv_kw[i];
    }
    const auto terms = formation_objective(g, *snap, weights, s);
    s.load_shed_term = terms.shed;
    s.flow_term = terms.flow;
    s.objective_value = terms.total();
  } else {
    FormationSnapshot zero;
    zero.zone_load_kw.assign(n, 0.0);
    zero.zone_pv_kw.assign(n, 0.0);
    const auto terms = formation_objective(g, zero, weights, s);
    s.flow_term = terms.flow;
    s.objective_value = terms.total();
  }
  return s;
}

}  // namespace gridsplit
