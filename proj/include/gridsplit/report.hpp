#pragma once

// Run metrics, paired comparisons, and the columnar output files.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gridsplit/coordinator.hpp"

namespace gridsplit {

struct ZoneMetrics {
  int zone = 0;
  int feeder = 0;
  bool critical = false;
  double demand_kwh = 0.0;
  double served_kwh = 0.0;
  double unserved_kwh = 0.0;
  double percent_served = 0.0;  // 100 when there is no demand
  double unserved_hours = 0.0;
};

struct ResourceMetrics {
  int gfm_node = 0;
  double final_soc_kwh = 0.0;
  double final_soc_percent = 0.0;
  double final_fuel_kwh = 0.0;
  double diesel_kwh = 0.0;
};

struct MetricsSummary {
  std::string scenario_name;
  std::string fingerprint;  // hex
  std::string mode;
  std::vector<ZoneMetrics> zones;
  std::map<int, double> pv_utilization_by_feeder;  // percent
  double pv_utilization = 0.0;                     // percent
  double pv_available_kwh = 0.0;
  double pv_used_kwh = 0.0;
  int topology_change_count = 0;  // formation events that moved at least one zone
  int zones_moved = 0;
  std::vector<ResourceMetrics> resources;
  double critical_unserved_hours = 0.0;
  double total_demand_kwh = 0.0;
  double total_served_kwh = 0.0;
  double critical_percent_served_sum = 0.0;
};

MetricsSummary summarize(const RestorationRun& run);

// delta = b - a for every row.
struct ComparisonRow {
  std::string label;
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;
};

struct Comparison {
  std::string fingerprint;
  std::string mode_a;
  std::string mode_b;
  std::vector<ComparisonRow> rows;  // one per zone, then the totals
};

// Throws ScenarioMismatch when the summaries come from different scenarios.
Comparison compare(const MetricsSummary& a, const MetricsSummary& b);

std::string summary_json(const MetricsSummary& s);
MetricsSummary parse_summary_json(const std::string& text);
MetricsSummary read_summary(const std::filesystem::path& file);
std::string comparison_csv(const Comparison& c);

// Table texts; all deterministic for a given run.
std::string trace_csv(const RestorationRun& run);
std::string microgrids_csv(const RestorationRun& run);
std::string topology_changes_csv(const RestorationRun& run);
std::string formation_csv(const RestorationRun& run);
std::map<std::string, std::string> figure_csvs(const RestorationRun& run, const MetricsSummary& s);

// summary.json, trace.csv, microgrids.csv, topology_changes.csv,
// formation.csv, plus fig5..fig8 CSVs when `emit_plots`.
void write_run_outputs(const RestorationRun& run, const MetricsSummary& s, const std::filesystem::path& dir,
                       bool emit_plots);

}  // namespace gridsplit
