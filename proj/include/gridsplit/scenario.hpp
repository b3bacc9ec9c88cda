#pragma once

// Scenario definition: network, fault schedule, profiles, weights, timing.
// On disk a scenario is one JSON document plus two CSV profile tables.

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "gridsplit/formation.hpp"
#include "gridsplit/netmodel.hpp"
#include "gridsplit/profiles.hpp"

namespace gridsplit {

inline constexpr int kSchemaVersion = 1;

struct FaultWindow {
  int edge_id = 0;
  int start_minute = 0;
  int end_minute = 0;  // exclusive

  friend bool operator==(const FaultWindow&, const FaultWindow&) = default;
};

// All durations in minutes.
struct Timeline {
  int formation_horizon = 24 * 60;
  int formation_step = 180;
  int schedule_horizon = 24 * 60;
  int schedule_step = 30;
  int dispatch_horizon = 30;
  int dispatch_step = 5;
  int total_duration = 48 * 60;

  // Throws ValidationError (path under /timeline) on a bad nesting.
  void validate() const;
  int formation_events() const { return (total_duration + formation_step - 1) / formation_step; }
  int dispatch_steps() const { return total_duration / dispatch_step; }

  friend bool operator==(const Timeline&, const Timeline&) = default;
};

struct EmsSettings {
  double forecast_noise_sigma = 0.0;  // multiplicative, 0 means forecast = actuals
  bool critical_reserve = true;

  friend bool operator==(const EmsSettings&, const EmsSettings&) = default;
};

struct FormationSettings {
  bool use_max_aggregation = false;  // step snapshot from the max instead of the mean
  // Cap each GFM's injection by its stored energy spread over the lookahead.
  bool energy_aware_source_limit = true;

  friend bool operator==(const FormationSettings&, const FormationSettings&) = default;
};

struct Scenario {
  std::string name;
  ZoneGraph graph;  // fault-free; faults come from `faults`
  std::vector<FaultWindow> faults;
  ZoneProfiles profiles;  // actual load and PV at dispatch resolution
  FormationWeights weights;
  Timeline timeline;
  EmsSettings ems;
  FormationSettings formation;
  std::uint64_t seed = 0;

  std::set<int> faults_at(int minute) const;
  ZoneGraph graph_at(int minute) const { return graph.with_faults(faults_at(minute)); }
};

// Parses and validates. ParseError for unreadable or malformed files,
// ValidationError with a JSON-pointer path for semantic problems.
Scenario load_scenario(const std::filesystem::path& path);

// Writes <dir>/scenario.json, <dir>/load.csv and <dir>/pv.csv.
void save_scenario(const Scenario& s, const std::filesystem::path& dir);

// Checks a fully built scenario the same way load_scenario does.
void validate_scenario(const Scenario& s);

// Stable 64-bit digest of the canonical serialization; used to refuse
// comparing runs of different scenarios.
std::uint64_t scenario_fingerprint(const Scenario& s);

// Canonical JSON text (profiles referenced by the given file names).
std::string scenario_json(const Scenario& s, const std::string& load_csv = "load.csv",
                          const std::string& pv_csv = "pv.csv");
std::string profile_csv(const ZoneProfiles& p, bool pv);

// Built-in two-feeder, ten-zone case.
Scenario fixture_two_feeder();

// Fixture's lateral policies; `force_zero_right` pins the branch between each
// GFM and its tie-side leaf out of the GFM's microgrid.
std::vector<LateralPolicy> fixture_policies(bool force_zero_right = false);

}  // namespace gridsplit
