#include <gtest/gtest.h>

#include <random>

#include "gridsplit/enumeration.hpp"
#include "gridsplit/errors.hpp"
#include "gridsplit/formation.hpp"
#include "gridsplit/scenario.hpp"
#include "support.hpp"

using namespace gridsplit;
using gridsplit::testing::fixture_snapshot;
using gridsplit::testing::random_snapshot;

namespace {

int count_live(const std::vector<int>& ids) {
  return static_cast<int>(std::count_if(ids.begin(), ids.end(), [](int v) { return v >= 0; }));
}

int count_live(const std::vector<std::vector<int>>& ids) {
  int c = 0;
  for (const auto& row : ids) c += count_live(row);
  return c;
}

int closed_count(const FormationSolution& s) {
  return static_cast<int>(std::count(s.switch_status.begin(), s.switch_status.end(), 1));
}

int mg_of(const ZoneGraph& g, const FormationSolution& s, int zone) { return s.assignment[g.node_index(zone)]; }

}  // namespace

TEST(BuildMilp, FixtureVariableCounts) {
  const auto sc = fixture_two_feeder();
  const auto milp = build_milp(sc.graph, fixture_snapshot(sc, 0), sc.weights);
  EXPECT_EQ(count_live(milp.vars.y), 10);
  EXPECT_EQ(count_live(milp.vars.x), 20);
  EXPECT_EQ(count_live(milp.vars.z), 20);
  EXPECT_EQ(milp.radial_count, 8);
  EXPECT_EQ(milp.model.num_integer(), 50);
  EXPECT_NO_THROW(milp.model.check());
}

TEST(BuildMilp, RejectsBadSnapshotAndWeights) {
  const auto sc = fixture_two_feeder();
  auto snap = fixture_snapshot(sc, 0);
  snap.zone_load_kw.pop_back();
  EXPECT_THROW(build_milp(sc.graph, snap, sc.weights), ModelError);
  snap = fixture_snapshot(sc, 0);
  snap.zone_pv_kw[3] = -1.0;
  EXPECT_THROW(build_milp(sc.graph, snap, sc.weights), ModelError);
  FormationWeights w;
  w.critical_flow_weight = 0.5;
  EXPECT_THROW(build_milp(sc.graph, fixture_snapshot(sc, 0), w), ModelError);
}

TEST(BuildMilp, OversizedLateralMinimumIsInfeasibleBeforeSolving) {
  const auto sc = fixture_two_feeder();
  // Behind edge 1-3 the GFM at 1 can reach 3, 4, 5 and 6 at most.
  EXPECT_EQ(branch_capacity(sc.graph, 1, 2), 4);
  const auto g = sc.graph.with_policies({{1, 2, 5, false}});
  EXPECT_THROW(build_milp(g, fixture_snapshot(sc, 0), sc.weights), InfeasibleTopology);
  EXPECT_NO_THROW(build_milp(sc.graph.with_policies({{1, 2, 4, false}}), fixture_snapshot(sc, 0), sc.weights));
}

TEST(SolveFormation, RadialAndConsistentAcrossSteps) {
  const auto sc = fixture_two_feeder();
  for (int step = 0; step < sc.timeline.formation_events(); ++step) {
    const auto snap = fixture_snapshot(sc, step);
    const auto s = solve_formation(sc.graph, snap, sc.weights);
    EXPECT_EQ(closed_count(s), 8) << "step " << step;
    const auto census = is_radial_forest(sc.graph, s.closed_edges(sc.graph));
    ASSERT_TRUE(census.radial) << census.reason;
    for (std::size_t k = 0; k < census.trees.size(); ++k)
      EXPECT_EQ(census.trees[k].nodes, s.members(sc.graph, static_cast<int>(k)));
    EXPECT_NEAR(s.objective_value, formation_objective(sc.graph, snap, sc.weights, s).total(),
                1e-6 * std::max(1.0, std::abs(s.objective_value)));
  }
}

TEST(SolveFormation, LateralMinimumKeepsNearZones) {
  const auto sc = fixture_two_feeder();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = solve_formation(sc.graph, random_snapshot(sc, rng), sc.weights);
    EXPECT_EQ(mg_of(sc.graph, s, 3), 0);
    EXPECT_EQ(mg_of(sc.graph, s, 4), 0);
    EXPECT_EQ(mg_of(sc.graph, s, 8), 1);
    EXPECT_EQ(mg_of(sc.graph, s, 9), 1);
  }
}

TEST(SolveFormation, ForceZeroSendsZoneAcrossTie) {
  const auto sc = fixture_two_feeder();
  const auto g = sc.graph.with_policies(fixture_policies(true));
  const auto s = solve_formation(g, fixture_snapshot(sc, 4), sc.weights);
  // Edge 1-2 carries nothing, so zone 2 can only be fed from feeder-2.
  EXPECT_EQ(s.switch_status[g.edge_index(1)], 0);
  EXPECT_EQ(mg_of(g, s, 2), 1);
  EXPECT_EQ(mg_of(g, s, 6), 0);
}

TEST(SolveFormation, McCormickProductsExact) {
  const auto sc = fixture_two_feeder();
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto snap = random_snapshot(sc, rng);
    const auto milp = build_milp(sc.graph, snap, sc.weights);
    const auto r = solve_milp(milp.model);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    for (std::size_t e = 0; e < sc.graph.edge_count(); ++e) {
      const auto& edge = sc.graph.edges()[e];
      double sum = 0.0;
      for (std::size_t k = 0; k < 2; ++k) {
        const int z = milp.vars.z[e][k];
        const double xf = r.values[milp.vars.x[sc.graph.node_index(edge.from)][k]];
        const double xt = r.values[milp.vars.x[sc.graph.node_index(edge.to)][k]];
        EXPECT_NEAR(r.values[z], xf * xt, 1e-6);
        sum += r.values[z];
      }
      EXPECT_NEAR(sum, r.values[milp.vars.y[e]], 1e-6);
    }
  }
}

TEST(SolveFormation, CommodityCountsZonesBehindEachEdge) {
  const auto sc = fixture_two_feeder();
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = solve_formation(sc.graph, random_snapshot(sc, rng), sc.weights);
    const auto expect = subtree_commodity(sc.graph, s.closed_edges(sc.graph));
    for (std::size_t e = 0; e < sc.graph.edge_count(); ++e) EXPECT_NEAR(s.commodity_flow[e], expect[e], 1e-6);
    for (int k = 0; k < 2; ++k)
      EXPECT_NEAR(s.gfm_commodity[k], static_cast<double>(s.members(sc.graph, k).size()) - 1.0, 1e-6);
  }
}

TEST(SolveFormation, PowerBalancePerMicrogrid) {
  const auto sc = fixture_two_feeder();
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto snap = random_snapshot(sc, rng);
    const auto s = solve_formation(sc.graph, snap, sc.weights);
    for (int k = 0; k < 2; ++k) {
      double net = 0.0;
      for (int id : s.members(sc.graph, k)) {
        const auto i = sc.graph.node_index(id);
        net += s.served_load_kw[i] - s.pv_dispatch_kw[i];
        EXPECT_LE(s.served_load_kw[i], snap.zone_load_kw[i] + 1e-6);
        EXPECT_LE(s.pv_dispatch_kw[i], snap.zone_pv_kw[i] + 1e-6);
      }
      EXPECT_NEAR(net, s.source_kw[k], 1e-5);
      EXPECT_LE(s.source_kw[k], snap.source_limit_kw[k] + 1e-6);
    }
  }
}

TEST(Decode, FractionalBinaryRejected) {
  const auto sc = fixture_two_feeder();
  const auto snap = fixture_snapshot(sc, 0);
  const auto milp = build_milp(sc.graph, snap, sc.weights);
  auto r = solve_milp(milp.model);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NO_THROW(decode(r, milp, sc.graph, snap, sc.weights));
  r.values[milp.vars.y[0]] = 0.4999999;
  EXPECT_THROW(decode(r, milp, sc.graph, snap, sc.weights), DecodeError);
}

TEST(Decode, NonOptimalReportRejected) {
  const auto sc = fixture_two_feeder();
  const auto snap = fixture_snapshot(sc, 0);
  const auto milp = build_milp(sc.graph, snap, sc.weights);
  SolveReport r;
  r.status = SolveStatus::IterationLimit;
  EXPECT_THROW(decode(r, milp, sc.graph, snap, sc.weights), DecodeError);
}

TEST(SolveFormation, SymmetricSystemAgreesWithOracle) {
  const auto sc = gridsplit::testing::mirrored_scenario(true);
  for (int step : {0, 3, 7}) {
    const auto snap = fixture_snapshot(sc, step);
    const auto s = solve_formation(sc.graph, snap, sc.weights);
    const auto oracle = enumerate_optimal(sc.graph, snap, sc.weights);
    EXPECT_NEAR(s.objective_value, oracle.solution.objective_value,
                1e-6 * std::max(1.0, std::abs(oracle.solution.objective_value)));
    // Both ties join zones of equal depth, so the default partition is optimal.
    EXPECT_EQ(s.assignment, fixed_topology_solution(sc.graph).assignment);
  }
}

TEST(SolveFormation, SwitchPenaltyCountsChanges) {
  const auto sc = fixture_two_feeder();
  const auto snap = fixture_snapshot(sc, 4);
  const auto prev = fixed_topology_solution(sc.graph);
  const auto s = solve_formation(sc.graph, snap, sc.weights, &prev);
  int changes = 0;
  for (std::size_t e = 0; e < s.switch_status.size(); ++e) changes += s.switch_status[e] != prev.switch_status[e];
  EXPECT_NEAR(s.switch_term, sc.weights.switch_change_penalty * changes, 1e-9);
  // Against itself as the previous topology, no change costs anything.
  const auto again = solve_formation(sc.graph, snap, sc.weights, &s);
  EXPECT_NEAR(again.switch_term, 0.0, 1e-9);
}

TEST(SolveFormation, AddingPolicyNeverImprovesObjective) {
  const auto sc = fixture_two_feeder();
  const auto free_graph = sc.graph.with_policies({});
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto snap = random_snapshot(sc, rng);
    const double loose = solve_formation(free_graph, snap, sc.weights).objective_value;
    const double tight = solve_formation(sc.graph, snap, sc.weights).objective_value;
    const double forced = solve_formation(sc.graph.with_policies(fixture_policies(true)), snap, sc.weights).objective_value;
    EXPECT_LE(loose, tight + 1e-6);
    EXPECT_LE(tight, forced + 1e-6);
  }
}

TEST(SolveFormation, FaultedEdgeStaysOpen) {
  const auto sc = fixture_two_feeder();
  const auto g = sc.graph.with_faults({4, 9, 10});
  const auto s = solve_formation(g, fixture_snapshot(sc, 2), sc.weights);
  for (int e : {4, 9, 10}) EXPECT_EQ(s.switch_status[g.edge_index(e)], 0);
  EXPECT_EQ(mg_of(g, s, 4), 0);
  EXPECT_EQ(mg_of(g, s, 5), -1);
  EXPECT_EQ(closed_count(s), radial_edge_count(g));
}

TEST(SolveFormation, FaultShrinkingLateralBranchIsInfeasible) {
  // With 3-4 faulted only zone 3 sits behind edge 1-3, below the minimum of 2.
  const auto sc = fixture_two_feeder();
  EXPECT_THROW(solve_formation(sc.graph.with_faults({3}), fixture_snapshot(sc, 0), sc.weights), InfeasibleTopology);
}

TEST(SolveFormation, SingleFeederServesEverything) {
  const auto g = gridsplit::testing::single_feeder(4);
  FormationSnapshot snap;
  snap.zone_load_kw.assign(4, 100.0);
  snap.zone_pv_kw.assign(4, 0.0);
  const auto s = solve_formation(g, snap, {});
  EXPECT_EQ(s.members(g, 0), (std::set<int>{1, 2, 3, 4}));
  EXPECT_NEAR(s.load_shed_term, 0.0, 1e-9);
  EXPECT_NEAR(s.source_kw[0], 400.0, 1e-6);
}

TEST(SolveFormation, TightSourceShedsLoad) {
  const auto g = gridsplit::testing::single_feeder(3);
  FormationSnapshot snap;
  snap.zone_load_kw.assign(3, 100.0);
  snap.zone_pv_kw.assign(3, 0.0);
  snap.source_limit_kw = {250.0};
  const FormationWeights w;
  const auto s = solve_formation(g, snap, w);
  EXPECT_NEAR(s.source_kw[0], 250.0, 1e-6);
  EXPECT_NEAR(s.load_shed_term, 50.0 * w.shed_weight, 1e-6);
}

TEST(FixedTopology, FixtureDefaultPartition) {
  const auto sc = fixture_two_feeder();
  const auto s = fixed_topology_solution(sc.graph, fixture_snapshot(sc, 0), sc.weights);
  EXPECT_EQ(s.members(sc.graph, 0), (std::set<int>{1, 2, 3, 4, 5}));
  EXPECT_EQ(s.members(sc.graph, 1), (std::set<int>{6, 7, 8, 9, 10}));
  EXPECT_EQ(closed_count(s), 8);
  EXPECT_EQ(s.gfm_commodity, (std::vector<double>{4.0, 4.0}));
  // Zone 6 hangs off 7 across edge 6-7, so the flow there runs to -> from.
  EXPECT_DOUBLE_EQ(s.commodity_flow[sc.graph.edge_index(5)], -1.0);
  EXPECT_DOUBLE_EQ(s.commodity_flow[sc.graph.edge_index(2)], 3.0);
}

TEST(FixedTopology, UnreachableZonesUnassigned) {
  const auto g = fixture_two_feeder().graph.with_faults({3});
  const auto s = fixed_topology_solution(g);
  EXPECT_EQ(mg_of(g, s, 4), -1);
  EXPECT_EQ(mg_of(g, s, 5), -1);
  EXPECT_EQ(mg_of(g, s, 3), 0);
}

TEST(FixedTopology, CycleAndSharedTreeRejected) {
  std::vector<ZoneNode> nodes = {{1, 1, false, 1, 0, true}, {2, 1, false, 1, 0, false}, {3, 1, false, 1, 0, false}};
  const GridFormingResource r{1, 10, 10, 1, 1, 0, 0};
  const ZoneGraph triangle(nodes, {{1, 1, 2, false, 10}, {2, 2, 3, false, 10}, {3, 1, 3, false, 10}}, {r});
  EXPECT_THROW(fixed_topology_solution(triangle), TopologyError);

  nodes[2].has_gfm = true;
  auto r3 = r;
  r3.node_id = 3;
  const ZoneGraph joined(nodes, {{1, 1, 2, false, 10}, {2, 2, 3, false, 10}}, {r, r3});
  EXPECT_THROW(fixed_topology_solution(joined), TopologyError);
}
