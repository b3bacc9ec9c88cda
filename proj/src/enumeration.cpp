#include "gridsplit/enumeration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "gridsplit/errors.hpp"

namespace gridsplit {

std::vector<double> subtree_commodity(const ZoneGraph& g, const std::set<int>& closed) {
  std::vector<double> flow(g.edge_count(), 0.0);
  for (int root : g.gfm_nodes()) {
    std::vector<int> order{root};
    std::map<int, std::size_t> via;  // node -> edge index towards the root
    std::set<int> seen{root};
    for (std::size_t head = 0; head < order.size(); ++head) {
      const int u = order[head];
      for (auto e : g.incident(g.node_index(u))) {
        const auto& edge = g.edges()[e];
        if (!closed.contains(edge.id)) continue;
        const int w = edge.from == u ? edge.to : edge.from;
        if (seen.contains(w)) continue;
        seen.insert(w);
        via[w] = e;
        order.push_back(w);
      }
    }
    std::map<int, double> size;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      size[*it] += 1.0;
      const auto v = via.find(*it);
      if (v == via.end()) continue;
      const auto& edge = g.edges()[v->second];
      flow[v->second] = edge.to == *it ? size[*it] : -size[*it];
      size[edge.from == *it ? edge.to : edge.from] += size[*it];
    }
  }
  return flow;
}

namespace {

struct TopologyLp {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> served, pv, line, source;
};

// Dispatch LP for a fixed forest: line flows on closed edges, zone PV and load,
// GFM injections, nodal balance. Minimizes weighted shedding only.
TopologyLp solve_topology_lp(const ZoneGraph& g, const FormationSnapshot& snap, const FormationWeights& weights,
                             const std::set<int>& closed, const std::set<int>& islands) {
  const auto gfms = g.gfm_nodes();
  MilpModel lp;
  std::vector<int> line(g.edge_count(), -1), pv(g.node_count(), -1), load(g.node_count(), -1), src(gfms.size(), -1);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& edge = g.edges()[e];
    if (!closed.contains(edge.id) || islands.contains(edge.from)) continue;
    line[e] = lp.add_variable("T" + std::to_string(edge.id), -edge.flow_limit_kw, edge.flow_limit_kw);
  }
  double constant = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    constant += snap.zone_load_kw[i];
    if (islands.contains(g.nodes()[i].id)) continue;
    pv[i] = lp.add_variable("P" + std::to_string(i), snap.pv_min_kw.empty() ? 0.0 : snap.pv_min_kw[i],
                            snap.zone_pv_kw[i]);
    load[i] = lp.add_variable("D" + std::to_string(i), snap.load_min_kw.empty() ? 0.0 : snap.load_min_kw[i],
                              snap.zone_load_kw[i], false, -weights.shed_weight);
  }
  lp.add_objective_constant(weights.shed_weight * constant);
  for (std::size_t k = 0; k < gfms.size(); ++k) {
    double cap = g.resource_at(gfms[k]).source_power_kw();
    if (!snap.source_limit_kw.empty()) cap = std::clamp(snap.source_limit_kw[k], 0.0, cap);
    src[k] = lp.add_variable("G" + std::to_string(k), 0.0, cap);
  }
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (load[i] < 0) continue;
    const int id = g.nodes()[i].id;
    std::vector<Term> row{{load[i], 1.0}, {pv[i], -1.0}};
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      if (line[e] < 0) continue;
      if (g.edges()[e].from == id) row.push_back({line[e], 1.0});
      if (g.edges()[e].to == id) row.push_back({line[e], -1.0});
    }
    for (std::size_t k = 0; k < gfms.size(); ++k)
      if (gfms[k] == id) row.push_back({src[k], -1.0});
    lp.add_constraint("bal" + std::to_string(id), row, Relation::Equal, 0.0);
  }

  const auto report = solve_lp(lp);
  TopologyLp out;
  if (report.status != SolveStatus::Optimal) return out;
  out.feasible = true;
  out.objective = report.objective;
  auto val = [&](int var) { return var < 0 ? 0.0 : report.values[var]; };
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    out.served.push_back(val(load[i]));
    out.pv.push_back(val(pv[i]));
  }
  for (std::size_t e = 0; e < g.edge_count(); ++e) out.line.push_back(val(line[e]));
  for (std::size_t k = 0; k < gfms.size(); ++k) out.source.push_back(val(src[k]));
  return out;
}

bool policies_hold(const ZoneGraph& g, const std::set<int>& closed) {
  for (const auto& p : g.lateral_policies()) {
    const int load = branch_load(g, closed, p.gfm_node_id, p.edge_id);
    if (p.force_zero ? load != 0 : load < p.min_downstream_nodes) return false;
  }
  return true;
}

}  // namespace

EnumerationResult enumerate_optimal(const ZoneGraph& g, const FormationSnapshot& snap, const FormationWeights& weights,
                                    const FormationSolution* previous, int max_edges) {
  const auto gfms = g.gfm_nodes();
  if (gfms.empty()) throw ModelError("enumeration needs at least one grid-forming resource");
  if (snap.zone_load_kw.size() != g.node_count() || snap.zone_pv_kw.size() != g.node_count())
    throw ModelError("snapshot must carry one load and one PV value per zone");

  const auto islands = island_nodes(g);
  const auto island_tree = island_spanning_edges(g);
  std::vector<int> free_edges;
  for (const auto& e : g.edges())
    if (!g.is_faulted(e.id) && !islands.contains(e.from)) free_edges.push_back(e.id);
  if (static_cast<int>(free_edges.size()) > max_edges)
    throw GuardExceeded(std::to_string(free_edges.size()) + " switchable edges exceed the enumeration guard of " +
                        std::to_string(max_edges));
  const int choose = radial_edge_count(g) - static_cast<int>(island_tree.size());

  EnumerationResult result;
  double best = kInfinity;
  const int total = static_cast<int>(free_edges.size());
  if (choose < 0 || choose > total) throw InfeasibleTopology("radiality count cannot be met");

  // Lexicographic walk over k-subsets.
  std::vector<int> pick(choose);
  for (int i = 0; i < choose; ++i) pick[i] = i;
  while (true) {
    ++result.candidate_subsets;
    std::set<int> closed = island_tree;
    for (int i : pick) closed.insert(free_edges[i]);

    const auto census = is_radial_forest(g, closed);
    if (census.radial) {
      ++result.radial_subsets;
      if (policies_hold(g, closed)) {
        const auto lp = solve_topology_lp(g, snap, weights, closed, islands);
        if (lp.feasible) {
          ++result.feasible_subsets;
          result.feasible_topologies.push_back(closed);

          FormationSolution s;
          s.switch_status.resize(g.edge_count());
          for (std::size_t e = 0; e < g.edge_count(); ++e) s.switch_status[e] = closed.contains(g.edges()[e].id);
          s.assignment.assign(g.node_count(), -1);
          s.gfm_commodity.assign(gfms.size(), 0.0);
          for (std::size_t k = 0; k < census.trees.size(); ++k) {
            for (int id : census.trees[k].nodes) s.assignment[g.node_index(id)] = static_cast<int>(k);
            s.gfm_commodity[k] = static_cast<double>(census.trees[k].nodes.size()) - 1.0;
          }
          s.served_load_kw = lp.served;
          s.pv_dispatch_kw = lp.pv;
          s.line_flow_kw = lp.line;
          s.source_kw = lp.source;
          s.commodity_flow = subtree_commodity(g, closed);
          const auto terms = formation_objective(g, snap, weights, s, previous);
          s.load_shed_term = terms.shed;
          s.flow_term = terms.flow;
          s.switch_term = terms.switching;
          s.objective_value = terms.total();
          if (result.feasible_subsets == 1 || s.objective_value < best - 1e-9 * std::max(1.0, std::abs(best))) {
            best = s.objective_value;
            result.solution = std::move(s);
          }
        }
      }
    }

    int i = choose - 1;
    while (i >= 0 && pick[i] == total - choose + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < choose; ++j) pick[j] = pick[j - 1] + 1;
  }

  if (result.feasible_subsets == 0) throw InfeasibleTopology("no enumerated topology satisfies the lateral policies");
  return result;
}

}  // namespace gridsplit
