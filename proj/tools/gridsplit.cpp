// Command-line front end: run, compare, enumerate, validate, fixture.

#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gridsplit/coordinator.hpp"
#include "gridsplit/enumeration.hpp"
#include "gridsplit/errors.hpp"
#include "gridsplit/log.hpp"
#include "gridsplit/report.hpp"
#include "gridsplit/scenario.hpp"

namespace fs = std::filesystem;
using namespace gridsplit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitSolverLimit = 3;

std::string join(const std::set<int>& ids) {
  std::string out;
  for (int id : ids) out += (out.empty() ? "" : ",") + std::to_string(id);
  return "{" + out + "}";
}

int cmd_run(const fs::path& scenario_path, const std::string& mode_name, const fs::path& out, bool plots,
            std::optional<std::uint64_t> seed, const fs::path& export_lp) {
  const auto mode = parse_mode(mode_name);
  const auto scenario = load_scenario(scenario_path);
  RunOptions opts;
  opts.seed = seed;
  opts.export_lp_dir = export_lp;
  try {
    const auto r = run(scenario, mode, opts);
    const auto s = summarize(r);
    write_run_outputs(r, s, out, plots);
    fmt::print("{} run: served {:.1f} of {:.1f} kWh, PV utilization {:.2f}%, {} topology changes -> {}\n",
               s.mode, s.total_served_kwh, s.total_demand_kwh, s.pv_utilization, s.topology_change_count,
               out.string());
  } catch (const RunAborted& e) {
    write_run_outputs(e.partial(), summarize(e.partial()), out, plots);
    std::cerr << "run aborted, partial trace written to " << out << "\n";
    std::rethrow_exception(e.cause());
  }
  return kExitOk;
}

int cmd_compare(const fs::path& a, const fs::path& b) {
  const auto sa = read_summary(fs::is_directory(a) ? a / "summary.json" : a);
  const auto sb = read_summary(fs::is_directory(b) ? b / "summary.json" : b);
  std::cout << comparison_csv(compare(sa, sb));
  return kExitOk;
}

int cmd_enumerate(const fs::path& scenario_path, int step) {
  const auto sc = load_scenario(scenario_path);
  const int minute = step * sc.timeline.formation_step;
  if (step < 0 || minute >= sc.timeline.total_duration)
    throw ValidationError("/timeline", fmt::format("step {} is outside the run", step));
  const auto g = sc.graph_at(minute);
  std::vector<MicrogridState> states;
  const auto gfms = g.gfm_nodes();
  for (std::size_t k = 0; k < gfms.size(); ++k) states.push_back(initial_state(static_cast<int>(k), g.resource_at(gfms[k])));
  const auto forecast = make_forecast(sc.profiles, sc.ems.forecast_noise_sigma, sc.seed);
  const auto snap = formation_snapshot(sc, g, forecast, minute, states);
  const auto previous = fixed_topology_solution(g);

  const auto oracle = enumerate_optimal(g, snap, sc.weights, &previous);
  const auto milp = solve_formation(g, snap, sc.weights, &previous);
  fmt::print("step {} (minute {}), resources at their initial charge\n", step, minute);
  fmt::print("candidate subsets {}, radial {}, feasible {}\n", oracle.candidate_subsets, oracle.radial_subsets,
             oracle.feasible_subsets);
  fmt::print("enumeration objective {:.9f}\n", oracle.solution.objective_value);
  fmt::print("branch-and-bound objective {:.9f}\n", milp.objective_value);
  fmt::print("closed edges {}\n", join(oracle.solution.closed_edges(g)));
  for (std::size_t k = 0; k < gfms.size(); ++k)
    fmt::print("microgrid {} (GFM {}): {}\n", k + 1, gfms[k], join(oracle.solution.members(g, static_cast<int>(k))));
  return kExitOk;
}

int cmd_validate(const fs::path& scenario_path) {
  const auto sc = load_scenario(scenario_path);
  fmt::print("ok: {} zones, {} edges, {} GFMs, {} fault windows, {} min\n", sc.graph.node_count(),
             sc.graph.edge_count(), sc.graph.gfm_nodes().size(), sc.faults.size(), sc.timeline.total_duration);
  return kExitOk;
}

int cmd_fixture(const fs::path& out) {
  save_scenario(fixture_two_feeder(), out);
  fmt::print("wrote {}\n", (out / "scenario.json").string());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Rolling-horizon multi-microgrid formation and restoration"};
  app.require_subcommand(1);

  fs::path scenario, out, a, b, export_lp;
  std::string mode = "flexible";
  bool plots = false;
  std::optional<std::uint64_t> seed;
  int step = 0;

  auto* run_cmd = app.add_subcommand("run", "Simulate a restoration run and write its outputs");
  run_cmd->add_option("--scenario", scenario, "Scenario JSON")->required();
  run_cmd->add_option("--mode", mode, "flexible or fixed")->check(CLI::IsMember({"flexible", "fixed"}));
  run_cmd->add_option("--out", out, "Output directory")->required();
  run_cmd->add_flag("--emit-plots", plots, "Also write the per-figure CSVs");
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--export-lp", export_lp, "Write each formation model in LP format to this directory");

  auto* cmp_cmd = app.add_subcommand("compare", "Compare two run outputs (delta = b - a)");
  cmp_cmd->add_option("--a", a, "First run directory or summary.json")->required();
  cmp_cmd->add_option("--b", b, "Second run directory or summary.json")->required();

  auto* enum_cmd = app.add_subcommand("enumerate", "Brute-force one formation step and check it against the MILP");
  enum_cmd->add_option("--scenario", scenario, "Scenario JSON")->required();
  enum_cmd->add_option("--step", step, "Formation step index")->required();

  auto* val_cmd = app.add_subcommand("validate", "Load and validate a scenario");
  val_cmd->add_option("--scenario", scenario, "Scenario JSON")->required();

  auto* fix_cmd = app.add_subcommand("fixture", "Write the built-in two-feeder scenario");
  fix_cmd->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) return cmd_run(scenario, mode, out, plots, seed, export_lp);
    if (*cmp_cmd) return cmd_compare(a, b);
    if (*enum_cmd) return cmd_enumerate(scenario, step);
    if (*val_cmd) return cmd_validate(scenario);
    if (*fix_cmd) return cmd_fixture(out);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const SolverLimit& e) {
    std::cerr << "solver limit: " << e.what() << "\n";
    return kExitSolverLimit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
