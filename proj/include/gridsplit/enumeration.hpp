#pragma once

// Brute-force formation oracle for desk-scale graphs: every closed-edge set of
// the radiality size is checked for radiality and lateral policies, and the
// continuous dispatch of each surviving topology is solved as a small LP.

#include <set>
#include <vector>

#include "gridsplit/formation.hpp"

namespace gridsplit {

struct EnumerationResult {
  FormationSolution solution;
  long candidate_subsets = 0;
  long radial_subsets = 0;    // pass is_radial_forest
  long feasible_subsets = 0;  // also meet the lateral policies and the LP
  std::vector<std::set<int>> feasible_topologies;  // closed-edge sets, enumeration order
};

// Throws GuardExceeded when more than `max_edges` switchable edges would have
// to be enumerated, InfeasibleTopology when no topology survives.
EnumerationResult enumerate_optimal(const ZoneGraph& g, const FormationSnapshot& snap, const FormationWeights& weights,
                                    const FormationSolution* previous = nullptr, int max_edges = 20);

// Signed commodity per edge for a radial closed set: the subtree size below
// each closed edge, positive in the edge's from -> to direction.
std::vector<double> subtree_commodity(const ZoneGraph& g, const std::set<int>& closed);

}  // namespace gridsplit
