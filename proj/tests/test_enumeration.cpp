#include <gtest/gtest.h>

#include <random>

#include "gridsplit/enumeration.hpp"
#include "gridsplit/errors.hpp"
#include "gridsplit/scenario.hpp"
#include "support.hpp"

using namespace gridsplit;
using gridsplit::testing::fixture_snapshot;
using gridsplit::testing::random_snapshot;

TEST(Enumeration, FixtureCounts) {
  const auto sc = fixture_two_feeder();
  const auto r = enumerate_optimal(sc.graph, fixture_snapshot(sc, 0), sc.weights);
  EXPECT_EQ(r.candidate_subsets, 45);
  EXPECT_EQ(r.radial_subsets, 25);
  EXPECT_EQ(r.feasible_subsets, 9);
  EXPECT_EQ(r.feasible_topologies.size(), 9u);
  // The counts depend on the graph and the policies only.
  const auto again = enumerate_optimal(sc.graph, fixture_snapshot(sc, 9), sc.weights);
  EXPECT_EQ(again.feasible_topologies, r.feasible_topologies);
}

TEST(Enumeration, RandomSnapshotsMatchMilp) {
  const auto sc = fixture_two_feeder();
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const auto snap = random_snapshot(sc, rng);
    const auto milp = solve_formation(sc.graph, snap, sc.weights);
    const auto oracle = enumerate_optimal(sc.graph, snap, sc.weights);
    const double scale = std::max(1.0, std::abs(oracle.solution.objective_value));
    EXPECT_NEAR(milp.objective_value, oracle.solution.objective_value, 1e-6 * scale) << "trial " << trial;
  }
}

TEST(Enumeration, MatchesMilpWithPreviousTopology) {
  const auto sc = fixture_two_feeder();
  const auto prev = fixed_topology_solution(sc.graph);
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const auto snap = random_snapshot(sc, rng);
    const auto milp = solve_formation(sc.graph, snap, sc.weights, &prev);
    const auto oracle = enumerate_optimal(sc.graph, snap, sc.weights, &prev);
    EXPECT_NEAR(milp.objective_value, oracle.solution.objective_value,
                1e-6 * std::max(1.0, std::abs(oracle.solution.objective_value)));
  }
}

TEST(Enumeration, MatchesMilpUnderFaults) {
  const auto sc = fixture_two_feeder();
  const auto g = sc.graph.with_faults({4, 9, 10});
  const auto snap = fixture_snapshot(sc, 4);
  const auto milp = solve_formation(g, snap, sc.weights);
  const auto oracle = enumerate_optimal(g, snap, sc.weights);
  EXPECT_NEAR(milp.objective_value, oracle.solution.objective_value, 1e-6 * std::abs(milp.objective_value));
  EXPECT_EQ(oracle.solution.assignment, milp.assignment);
}

TEST(Enumeration, PoliciesPinningDefaultLeaveOneTopology) {
  const auto sc = fixture_two_feeder();
  // Minimums equal to the default branches fix every tie open.
  const auto g = sc.graph.with_policies({{1, 1, 1, false}, {1, 2, 3, false}, {7, 5, 1, false}, {7, 6, 3, false}});
  const auto r = enumerate_optimal(g, fixture_snapshot(sc, 0), sc.weights);
  ASSERT_EQ(r.feasible_subsets, 1);
  EXPECT_EQ(r.feasible_topologies[0], default_closed_edges(g));
  EXPECT_EQ(r.solution.assignment, fixed_topology_solution(g).assignment);
}

TEST(Enumeration, ImpossiblePolicyRaises) {
  const auto sc = fixture_two_feeder();
  const auto g = sc.graph.with_policies({{1, 2, 5, false}});
  EXPECT_THROW(enumerate_optimal(g, fixture_snapshot(sc, 0), sc.weights), InfeasibleTopology);
}

TEST(Enumeration, GuardStopsLargeGraphs) {
  const auto g = gridsplit::testing::single_feeder(25);
  FormationSnapshot snap;
  snap.zone_load_kw.assign(25, 1.0);
  snap.zone_pv_kw.assign(25, 0.0);
  EXPECT_THROW(enumerate_optimal(g, snap, {}), GuardExceeded);
  EXPECT_NO_THROW(enumerate_optimal(g, snap, {}, nullptr, 30));
}

TEST(SubtreeCommodity, DefaultTopology) {
  const auto g = fixture_two_feeder().graph;
  const auto c = subtree_commodity(g, default_closed_edges(g));
  EXPECT_EQ(c, (std::vector<double>{1, 3, 2, 1, -1, 3, 2, 1, 0, 0}));
}
