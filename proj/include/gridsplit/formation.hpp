#pragma once

// Multi-microgrid formation: translate a zone graph and a load/PV snapshot
// into a MILP whose optimum partitions the graph into radial trees, one per
// grid-forming resource, and decode the solver's answer.

#include <optional>
#include <set>
#include <vector>

#include "gridsplit/milp.hpp"
#include "gridsplit/netmodel.hpp"

namespace gridsplit {

// Per-zone vectors are aligned with ZoneGraph::nodes(). Empty optional
// vectors mean zero minimums and rating-bounded sources.
struct FormationSnapshot {
  int step_index = 0;
  std::vector<double> zone_load_kw;
  std::vector<double> zone_pv_kw;
  std::vector<double> pv_min_kw;
  std::vector<double> load_min_kw;
  // Per GFM (ZoneGraph::gfm_nodes() order). Capped at the resource rating.
  std::vector<double> source_limit_kw;
};

struct FormationWeights {
  double critical_flow_weight = 10.0;
  double default_flow_weight = 1.0;
  double shed_weight = 1000.0;
  double switch_change_penalty = 0.1;

  double flow_weight(const ZoneNode& head) const {
    return head.is_critical ? critical_flow_weight : default_flow_weight;
  }
};

struct FormationSolution {
  std::vector<int> switch_status;        // per edge, 0 open / 1 closed
  std::vector<int> assignment;           // per zone, microgrid index or -1
  std::vector<double> served_load_kw;    // per zone
  std::vector<double> pv_dispatch_kw;    // per zone
  std::vector<double> source_kw;         // per microgrid
  std::vector<double> line_flow_kw;      // per edge, positive from -> to
  std::vector<double> commodity_flow;    // per edge, positive from -> to
  std::vector<double> gfm_commodity;     // per microgrid (W)
  double objective_value = 0.0;
  double load_shed_term = 0.0;
  double flow_term = 0.0;
  double switch_term = 0.0;

  std::set<int> closed_edges(const ZoneGraph& g) const;
  std::set<int> members(const ZoneGraph& g, int microgrid) const;
};

// Variable ids inside the emitted model; -1 where a variable does not exist
// (faulted or island edges, island zones).
struct FormationVariables {
  std::vector<int> y;
  std::vector<std::vector<int>> x;  // [zone][microgrid]
  std::vector<std::vector<int>> z;  // [edge][microgrid]
  std::vector<int> line_flow;
  std::vector<int> pv;
  std::vector<int> load;
  std::vector<int> source;
  std::vector<int> commodity_fwd;
  std::vector<int> commodity_rev;
  std::vector<int> gfm_commodity;
};

struct FormationMilp {
  MilpModel model;
  FormationVariables vars;
  int radial_count = 0;
};

// Throws InfeasibleTopology when a lateral policy asks for more downstream
// zones than its branch holds, ModelError for an unusable graph or snapshot.
FormationMilp build_milp(const ZoneGraph& g, const FormationSnapshot& snap, const FormationWeights& weights,
                         const FormationSolution* previous = nullptr);

// Rounds binaries (tolerance 1e-6), checks the partition and recomputes the
// objective. Throws DecodeError on any inconsistency.
FormationSolution decode(const SolveReport& report, const FormationMilp& milp, const ZoneGraph& g,
                         const FormationSnapshot& snap, const FormationWeights& weights,
                         const FormationSolution* previous = nullptr);

// build + solve_milp + decode. Solver infeasibility surfaces as
// InfeasibleTopology, a node/pivot budget hit as SolverLimit.
FormationSolution solve_formation(const ZoneGraph& g, const FormationSnapshot& snap, const FormationWeights& weights,
                                  const FormationSolution* previous = nullptr, const SolverOptions& options = {});

// The normally-closed topology with no optimization. Zones that cannot reach
// a GFM through it stay unassigned. Throws TopologyError on a cycle or on two
// GFMs sharing a tree.
FormationSolution fixed_topology_solution(const ZoneGraph& g, const std::optional<FormationSnapshot>& snap = {},
                                          const FormationWeights& weights = {});

// Objective terms for a given topology and continuous values, independent of
// the MILP encoding.
struct ObjectiveTerms {
  double shed = 0.0;
  double flow = 0.0;
  double switching = 0.0;
  double total() const { return shed + flow + switching; }
};
ObjectiveTerms formation_objective(const ZoneGraph& g, const FormationSnapshot& snap, const FormationWeights& weights,
                                   const FormationSolution& solution, const FormationSolution* previous = nullptr);

// Largest number of zones that could sit behind `edge_id` on the far side of
// the GFM at `gfm_node` (other GFMs and faulted edges block the walk).
int branch_capacity(const ZoneGraph& g, int gfm_node, int edge_id);

// Commodity leaving `gfm_node` through `edge_id` for a radial topology: the
// size of the subtree hanging off that edge, 0 when the edge is open.
int branch_load(const ZoneGraph& g, const std::set<int>& closed, int gfm_node, int edge_id);

}  // namespace gridsplit
