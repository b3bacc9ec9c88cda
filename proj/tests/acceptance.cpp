// Runs every acceptance criterion on the bundled fixture and prints one
// PASS/FAIL line per criterion. Exit status is nonzero when any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <fmt/core.h>

#include "gridsplit/enumeration.hpp"
#include "gridsplit/errors.hpp"
#include "gridsplit/report.hpp"
#include "support.hpp"

using namespace gridsplit;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

FormationSolution previous_for(const Scenario& sc, const RestorationRun& run, std::size_t i) {
  return i == 0 ? fixed_topology_solution(sc.graph_at(0)) : run.formations[i - 1].solution;
}

Outcome oracle_equivalence(const Scenario& sc) {
  Outcome o;
  std::mt19937_64 rng(20240611);
  double worst_rel = 0.0, slowest = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto snap = testing::random_snapshot(sc, rng);
    const auto t0 = Clock::now();
    const auto milp = solve_formation(sc.graph, snap, sc.weights);
    const auto oracle = enumerate_optimal(sc.graph, snap, sc.weights);
    slowest = std::max(slowest, seconds_since(t0));
    const double ref = oracle.solution.objective_value;
    const double rel = std::abs(milp.objective_value - ref) / std::max(1.0, std::abs(ref));
    worst_rel = std::max(worst_rel, rel);
    if (rel > 1e-6) o.fail(fmt::format("snapshot {}: B&B {} vs enumeration {}", trial, milp.objective_value, ref));
  }
  if (slowest >= 5.0) o.fail(fmt::format("slowest pair took {:.2f} s", slowest));
  if (o.pass) o.detail = fmt::format("50 snapshots, worst relative gap {:.1e}, slowest pair {:.3f} s", worst_rel, slowest);
  return o;
}

Outcome radiality(const RestorationRun& run) {
  Outcome o;
  for (const auto& ev : run.formations) {
    const auto g = run.graph.with_faults(ev.faulted);
    const auto closed = ev.solution.closed_edges(g);
    const auto census = is_radial_forest(g, closed);
    if (!census.radial) o.fail(fmt::format("minute {}: {}", ev.minute, census.reason));
    if (static_cast<int>(closed.size()) != radial_edge_count(g))
      o.fail(fmt::format("minute {}: {} closed switches, expected {}", ev.minute, closed.size(), radial_edge_count(g)));
  }
  if (run.formations.size() != 16) o.fail(fmt::format("{} formation solves, expected 16", run.formations.size()));
  if (o.pass) o.detail = fmt::format("{} solves, each radial with 8 closed switches", run.formations.size());
  return o;
}

Outcome mccormick(const Scenario& sc, const RestorationRun& run) {
  Outcome o;
  long checked = 0;
  for (std::size_t i = 0; i < run.formations.size(); ++i) {
    const auto& ev = run.formations[i];
    const auto g = sc.graph.with_faults(ev.faulted);
    const auto prev = previous_for(sc, run, i);
    const auto milp = build_milp(g, ev.snapshot, sc.weights, &prev);
    const auto r = solve_milp(milp.model);
    if (r.status != SolveStatus::Optimal) {
      o.fail(fmt::format("minute {}: {}", ev.minute, to_string(r.status)));
      continue;
    }
    auto bit = [&](int var) { return static_cast<int>(std::lround(r.values[var])); };
    for (std::size_t e = 0; e < g.edge_count(); ++e)
      for (std::size_t k = 0; k < milp.vars.z[e].size(); ++k) {
        const int z = milp.vars.z[e][k];
        if (z < 0) continue;
        const auto& edge = g.edges()[e];
        const int xf = bit(milp.vars.x[g.node_index(edge.from)][k]);
        const int xt = bit(milp.vars.x[g.node_index(edge.to)][k]);
        ++checked;
        if (bit(z) != xf * xt) o.fail(fmt::format("minute {}, edge {}, microgrid {}", ev.minute, edge.id, k + 1));
      }
    if (!(ev.solution.assignment == decode(r, milp, g, ev.snapshot, sc.weights, &prev).assignment))
      o.fail(fmt::format("minute {}: re-solve decodes differently", ev.minute));
  }
  if (o.pass) o.detail = fmt::format("{} products checked over {} solves", checked, run.formations.size());
  return o;
}

Outcome leaf_exchange(const Scenario& sc) {
  Outcome o;
  std::string moved;
  for (bool force_zero : {false, true}) {
    auto s = sc;
    s.graph = sc.graph.with_policies(fixture_policies(force_zero));
    const auto r = run(s, Mode::Flexible);
    const auto leaves = leaf_nodes(r.graph);
    for (const auto& c : diff_topologies(r))
      for (int z : c.zones) {
        if (!leaves.contains(z)) o.fail(fmt::format("zone {} moved at minute {}", z, c.minute));
        moved += fmt::format("{}{}", moved.empty() ? "" : " ", z);
      }
  }
  if (o.pass) o.detail = fmt::format("moved zones [{}] all in the leaf set {{2, 5, 6, 10}}", moved);
  return o;
}

Outcome direction(const MetricsSummary& fixed, const MetricsSummary& flexible) {
  Outcome o;
  const double d_served = flexible.total_served_kwh - fixed.total_served_kwh;
  const double d_pv = flexible.pv_utilization - fixed.pv_utilization;
  const double d_crit = flexible.critical_percent_served_sum - fixed.critical_percent_served_sum;
  o.detail = fmt::format("served {:+.1f} kWh, PV utilization {:+.2f} pt, critical percent-served sum {:+.2f}",
                         d_served, d_pv, d_crit);
  o.pass = d_served >= 0.0 && d_pv >= 0.0 && d_crit >= 0.0;
  return o;
}

Outcome conservation(const std::vector<const RestorationRun*>& runs) {
  Outcome o;
  for (const auto* r : runs) {
    const auto& g = r->graph;
    const double h = r->dispatch_step / 60.0;
    const auto gfms = g.gfm_nodes();
    std::vector<double> fuel;
    for (int gfm : gfms) fuel.push_back(g.resource_at(gfm).diesel_fuel_kwh);
    std::vector<double> demand(g.node_count()), accounted(g.node_count());
    double worst_balance = 0.0;
    for (const auto& ts : r->trace) {
      for (std::size_t k = 0; k < gfms.size(); ++k) {
        double net = 0.0;
        for (std::size_t i = 0; i < g.node_count(); ++i)
          if (ts.assignment[i] == static_cast<int>(k)) net += ts.served_kw[i] - ts.pv_used_kw[i];
        worst_balance = std::max(worst_balance, std::abs(net - ts.battery_kw[k] - ts.diesel_kw[k]));
        const auto& res = g.resource_at(gfms[k]);
        if (ts.soc_kwh[k] < 0.0 || ts.soc_kwh[k] > res.battery_energy_kwh)
          o.fail(fmt::format("{} minute {}: SoC {} outside capacity", to_string(r->mode), ts.minute, ts.soc_kwh[k]));
        if (ts.fuel_kwh[k] > fuel[k]) o.fail(fmt::format("{} minute {}: fuel increased", to_string(r->mode), ts.minute));
        fuel[k] = ts.fuel_kwh[k];
      }
      for (std::size_t i = 0; i < g.node_count(); ++i) {
        demand[i] += ts.demand_kw[i] * h;
        accounted[i] += (ts.served_kw[i] + ts.unserved_kw[i]) * h;
        if (ts.served_kw[i] > ts.demand_kw[i]) o.fail(fmt::format("zone {} served above demand", g.nodes()[i].id));
      }
    }
    if (worst_balance > 1e-6) o.fail(fmt::format("{}: balance off by {:.3e} kW", to_string(r->mode), worst_balance));
    if (r->trace.size() != 576) o.fail(fmt::format("{} steps, expected 576", r->trace.size()));
    for (std::size_t i = 0; i < g.node_count(); ++i)
      if (std::abs(demand[i] - accounted[i]) > 1e-3) o.fail(fmt::format("zone {} energy audit", g.nodes()[i].id));

    const auto s = summarize(*r);
    double supply = 0.0;
    for (const auto& ts : r->trace) {
      for (double v : ts.pv_used_kw) supply += v * h;
      for (std::size_t k = 0; k < gfms.size(); ++k) supply += (ts.battery_kw[k] + ts.diesel_kw[k]) * h;
    }
    if (std::abs(supply - s.total_served_kwh) > 1e-3) o.fail("system energy audit");
  }
  if (o.pass) o.detail = "balance, SoC bounds, fuel monotonicity and energy audits hold in both modes";
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const Scenario& sc) {
  Outcome o;
  const auto base = fs::temp_directory_path() / "gridsplit_acceptance";
  fs::remove_all(base);
  for (const char* name : {"a", "b"}) {
    const auto r = run(sc, Mode::Flexible);
    write_run_outputs(r, summarize(r), base / name, true);
  }
  int files = 0;
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    ++files;
    const auto other = base / "b" / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other))
      o.fail(entry.path().filename().string() + " differs");
  }
  fs::remove_all(base);
  if (o.pass) o.detail = fmt::format("{} output files byte-identical", files);
  return o;
}

Outcome runtime(const Scenario& sc) {
  Outcome o;
  const auto t0 = Clock::now();
  run(sc, Mode::Flexible);
  const double t = seconds_since(t0);
  o.pass = t < 60.0;
  o.detail = fmt::format("full flexible run {:.2f} s", t);
  return o;
}

Outcome lateral_infeasibility(const Scenario& sc) {
  Outcome o;
  const auto g = sc.graph.with_policies({{1, 2, branch_capacity(sc.graph, 1, 2) + 1, false}});
  try {
    build_milp(g, testing::fixture_snapshot(sc, 0), sc.weights);
    o.fail("build_milp accepted the policy");
  } catch (const InfeasibleTopology& e) {
    o.detail = e.what();
  }
  return o;
}

}  // namespace

int main() {
  const auto sc = fixture_two_feeder();
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    fmt::print("criterion {} {}: {} ({})\n", id, name, o.pass ? "PASS" : "FAIL", o.detail);
    std::fflush(stdout);
  };

  const auto flexible = run(sc, Mode::Flexible);
  const auto fixed = run(sc, Mode::Fixed);

  report(1, "oracle equivalence", [&] { return oracle_equivalence(sc); });
  report(2, "radiality and count", [&] { return radiality(flexible); });
  report(3, "McCormick exactness", [&] { return mccormick(sc, flexible); });
  report(4, "leaf exchange", [&] { return leaf_exchange(sc); });
  report(5, "direction of benefit", [&] { return direction(summarize(fixed), summarize(flexible)); });
  report(6, "conservation", [&] { return conservation({&fixed, &flexible}); });
  report(7, "determinism", [&] { return determinism(sc); });
  report(8, "runtime", [&] { return runtime(sc); });
  report(9, "lateral infeasibility detection", [&] { return lateral_infeasibility(sc); });

  fmt::print("{} of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
