#pragma once

// Rolling-horizon restoration: formation at a fixed cadence, then per-microgrid
// scheduling and dispatch until the next formation event.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gridsplit/ems.hpp"
#include "gridsplit/errors.hpp"
#include "gridsplit/formation.hpp"
#include "gridsplit/scenario.hpp"

namespace gridsplit {

enum class Mode { Flexible, Fixed };

std::string to_string(Mode m);
// Throws std::invalid_argument for anything but "flexible" / "fixed".
Mode parse_mode(const std::string& s);

struct FormationEvent {
  int minute = 0;
  std::set<int> faulted;
  FormationSnapshot snapshot;
  FormationSolution solution;
  bool optimized = false;  // false for the fixed default topology
  long node_count = 0;
  long lp_iterations = 0;
  double wall_seconds = 0.0;
};

// One dispatch step across the whole system. Per-zone vectors follow
// graph.nodes(), per-microgrid vectors follow graph.gfm_nodes().
struct TraceStep {
  int minute = 0;
  std::vector<int> assignment;  // microgrid index, -1 unassigned
  std::vector<int> switch_status;
  std::vector<double> demand_kw;
  std::vector<double> served_kw;
  std::vector<double> unserved_kw;
  std::vector<double> pv_available_kw;
  std::vector<double> pv_used_kw;
  std::vector<double> pv_curtailed_kw;
  std::vector<int> switching;  // 1 while the zone is dark after moving
  std::vector<double> battery_kw;
  std::vector<double> diesel_kw;
  std::vector<double> soc_kwh;
  std::vector<double> fuel_kwh;
};

struct RestorationRun {
  std::string scenario_name;
  std::uint64_t fingerprint = 0;
  Mode mode = Mode::Flexible;
  ZoneGraph graph;
  int dispatch_step = 5;
  std::vector<int> default_assignment;
  std::vector<FormationEvent> formations;
  std::vector<TraceStep> trace;
  std::vector<MicrogridState> final_states;
};

struct RunOptions {
  const EnergyManager* ems = nullptr;  // defaults to GreedyEms configured by the scenario
  std::optional<std::uint64_t> seed;   // overrides the scenario seed
  std::filesystem::path export_lp_dir;  // when set, each formation model is written there
  SolverOptions solver;
};

// Raised when a solver or EMS error stops a run; carries the trace so far.
class RunAborted : public Error {
 public:
  RunAborted(const std::string& what, std::shared_ptr<RestorationRun> partial, std::exception_ptr cause)
      : Error(what), partial_(std::move(partial)), cause_(cause) {}
  const RestorationRun& partial() const { return *partial_; }
  std::exception_ptr cause() const { return cause_; }

 private:
  std::shared_ptr<RestorationRun> partial_;
  std::exception_ptr cause_;
};

RestorationRun run(const Scenario& scenario, Mode mode, const RunOptions& options = {});

// Forecast seen by both formation and the EMS: actuals with optional
// multiplicative noise drawn from the seed.
ZoneProfiles make_forecast(const ZoneProfiles& actuals, double sigma, std::uint64_t seed);

// Snapshot of the formation step starting at `minute`: forecast aggregated
// over the step, and per-GFM source limits from the stored energy in `states`
// (one per GFM) when the scenario asks for them.
FormationSnapshot formation_snapshot(const Scenario& scenario, const ZoneGraph& g, const ZoneProfiles& forecast,
                                     int minute, const std::vector<MicrogridState>& states);

// Microgrid labels are 1-based; 0 means unassigned.
struct TopologyChange {
  int minute = 0;
  std::set<int> zones;
  int from = 0;
  int to = 0;
};

// Membership changes at formation events, starting from the default
// partition. Chronological, then by (from, to).
std::vector<TopologyChange> diff_topologies(const RestorationRun& run);

}  // namespace gridsplit
