#include "gridsplit/report.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gridsplit/errors.hpp"

namespace gridsplit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

double percent(double part, double whole, double empty) { return whole > 0.0 ? 100.0 * part / whole : empty; }

std::string num(double v) { return fmt::format("{:.6f}", v + 0.0); }

std::string join(const std::set<int>& ids) {
  std::string out;
  for (int id : ids) out += (out.empty() ? "" : ";") + std::to_string(id);
  return out;
}

}  // namespace

MetricsSummary summarize(const RestorationRun& run) {
  const auto& g = run.graph;
  const double hours = run.dispatch_step / 60.0;
  MetricsSummary s;
  s.scenario_name = run.scenario_name;
  s.fingerprint = fmt::format("{:016x}", run.fingerprint);
  s.mode = to_string(run.mode);

  std::map<int, double> pv_avail, pv_used;
  for (const auto& n : g.nodes()) {
    ZoneMetrics z;
    z.zone = n.id;
    z.feeder = n.feeder_id;
    z.critical = n.is_critical;
    s.zones.push_back(z);
    pv_avail[n.feeder_id] += 0.0;
    pv_used[n.feeder_id] += 0.0;
  }
  for (const auto& step : run.trace) {
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      auto& z = s.zones[i];
      z.demand_kwh += step.demand_kw[i] * hours;
      z.served_kwh += step.served_kw[i] * hours;
      z.unserved_kwh += step.unserved_kw[i] * hours;
      if (step.unserved_kw[i] > 1e-9) z.unserved_hours += hours;
      pv_avail[z.feeder] += step.pv_available_kw[i] * hours;
      pv_used[z.feeder] += step.pv_used_kw[i] * hours;
    }
  }
  for (auto& z : s.zones) {
    z.percent_served = percent(z.served_kwh, z.demand_kwh, 100.0);
    s.total_demand_kwh += z.demand_kwh;
    s.total_served_kwh += z.served_kwh;
    if (z.critical) {
      s.critical_unserved_hours += z.unserved_hours;
      s.critical_percent_served_sum += z.percent_served;
    }
  }
  for (const auto& [feeder, avail] : pv_avail) {
    s.pv_utilization_by_feeder[feeder] = percent(pv_used[feeder], avail, 0.0);
    s.pv_available_kwh += avail;
    s.pv_used_kwh += pv_used[feeder];
  }
  s.pv_utilization = percent(s.pv_used_kwh, s.pv_available_kwh, 0.0);

  std::set<int> change_minutes;
  for (const auto& c : diff_topologies(run)) {
    change_minutes.insert(c.minute);
    s.zones_moved += static_cast<int>(c.zones.size());
  }
  s.topology_change_count = static_cast<int>(change_minutes.size());

  const auto gfms = g.gfm_nodes();
  for (std::size_t k = 0; k < gfms.size(); ++k) {
    ResourceMetrics r;
    r.gfm_node = gfms[k];
    const auto& res = g.resource_at(gfms[k]);
    r.final_soc_kwh = run.trace.empty() ? res.battery_soc0 * res.battery_energy_kwh : run.trace.back().soc_kwh[k];
    r.final_soc_percent = percent(r.final_soc_kwh, res.battery_energy_kwh, 0.0);
    r.final_fuel_kwh = run.trace.empty() ? res.diesel_fuel_kwh : run.trace.back().fuel_kwh[k];
    for (const auto& step : run.trace) r.diesel_kwh += step.diesel_kw[k] * hours;
    s.resources.push_back(r);
  }
  return s;
}

Comparison compare(const MetricsSummary& a, const MetricsSummary& b) {
  if (a.fingerprint != b.fingerprint || a.zones.size() != b.zones.size())
    throw ScenarioMismatch("runs come from different scenarios (" + a.fingerprint + " vs " + b.fingerprint + ")");
  Comparison c;
  c.fingerprint = a.fingerprint;
  c.mode_a = a.mode;
  c.mode_b = b.mode;
  auto row = [&](std::string label, double x, double y) { c.rows.push_back({std::move(label), x, y, y - x}); };
  for (std::size_t i = 0; i < a.zones.size(); ++i) {
    if (a.zones[i].zone != b.zones[i].zone) throw ScenarioMismatch("zone lists differ");
    row(fmt::format("zone_{}_percent_served", a.zones[i].zone), a.zones[i].percent_served, b.zones[i].percent_served);
  }
  row("total_served_kwh", a.total_served_kwh, b.total_served_kwh);
  row("pv_utilization_percent", a.pv_utilization, b.pv_utilization);
  row("critical_percent_served_sum", a.critical_percent_served_sum, b.critical_percent_served_sum);
  row("critical_unserved_hours", a.critical_unserved_hours, b.critical_unserved_hours);
  return c;
}

std::string comparison_csv(const Comparison& c) {
  std::string out = fmt::format("# delta = b - a; a = {}, b = {}, scenario {}\n", c.mode_a, c.mode_b, c.fingerprint);
  out += "metric,a,b,delta\n";
  for (const auto& r : c.rows) out += fmt::format("{},{},{},{}\n", r.label, num(r.a), num(r.b), num(r.delta));
  return out;
}

std::string summary_json(const MetricsSummary& s) {
  ordered_json j;
  j["scenario"] = s.scenario_name;
  j["fingerprint"] = s.fingerprint;
  j["mode"] = s.mode;
  j["total_demand_kwh"] = s.total_demand_kwh;
  j["total_served_kwh"] = s.total_served_kwh;
  j["pv_available_kwh"] = s.pv_available_kwh;
  j["pv_used_kwh"] = s.pv_used_kwh;
  j["pv_utilization_percent"] = s.pv_utilization;
  ordered_json feeders = ordered_json::object();
  for (const auto& [f, u] : s.pv_utilization_by_feeder) feeders[std::to_string(f)] = u;
  j["pv_utilization_by_feeder_percent"] = feeders;
  j["topology_change_count"] = s.topology_change_count;
  j["zones_moved"] = s.zones_moved;
  j["critical_unserved_hours"] = s.critical_unserved_hours;
  j["critical_percent_served_sum"] = s.critical_percent_served_sum;
  ordered_json zones = ordered_json::array();
  for (const auto& z : s.zones)
    zones.push_back({{"zone", z.zone},
                     {"feeder", z.feeder},
                     {"critical", z.critical},
                     {"demand_kwh", z.demand_kwh},
                     {"served_kwh", z.served_kwh},
                     {"unserved_kwh", z.unserved_kwh},
                     {"percent_served", z.percent_served},
                     {"unserved_hours", z.unserved_hours}});
  j["zones"] = zones;
  ordered_json res = ordered_json::array();
  for (const auto& r : s.resources)
    res.push_back({{"gfm_node", r.gfm_node},
                   {"final_soc_kwh", r.final_soc_kwh},
                   {"final_soc_percent", r.final_soc_percent},
                   {"final_fuel_kwh", r.final_fuel_kwh},
                   {"diesel_kwh", r.diesel_kwh}});
  j["resources"] = res;
  return j.dump(2) + "\n";
}

MetricsSummary parse_summary_json(const std::string& text) {
  MetricsSummary s;
  try {
    const auto j = json::parse(text);
    s.scenario_name = j.at("scenario").get<std::string>();
    s.fingerprint = j.at("fingerprint").get<std::string>();
    s.mode = j.at("mode").get<std::string>();
    s.total_demand_kwh = j.at("total_demand_kwh").get<double>();
    s.total_served_kwh = j.at("total_served_kwh").get<double>();
    s.pv_available_kwh = j.at("pv_available_kwh").get<double>();
    s.pv_used_kwh = j.at("pv_used_kwh").get<double>();
    s.pv_utilization = j.at("pv_utilization_percent").get<double>();
    for (const auto& [f, u] : j.at("pv_utilization_by_feeder_percent").items())
      s.pv_utilization_by_feeder[std::stoi(f)] = u.get<double>();
    s.topology_change_count = j.at("topology_change_count").get<int>();
    s.zones_moved = j.at("zones_moved").get<int>();
    s.critical_unserved_hours = j.at("critical_unserved_hours").get<double>();
    s.critical_percent_served_sum = j.at("critical_percent_served_sum").get<double>();
    for (const auto& z : j.at("zones"))
      s.zones.push_back({z.at("zone").get<int>(), z.at("feeder").get<int>(), z.at("critical").get<bool>(),
                         z.at("demand_kwh").get<double>(), z.at("served_kwh").get<double>(),
                         z.at("unserved_kwh").get<double>(), z.at("percent_served").get<double>(),
                         z.at("unserved_hours").get<double>()});
    for (const auto& r : j.at("resources"))
      s.resources.push_back({r.at("gfm_node").get<int>(), r.at("final_soc_kwh").get<double>(),
                             r.at("final_soc_percent").get<double>(), r.at("final_fuel_kwh").get<double>(),
                             r.at("diesel_kwh").get<double>()});
  } catch (const json::exception& e) {
    throw ParseError(std::string("summary: ") + e.what());
  }
  return s;
}

MetricsSummary read_summary(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_summary_json(ss.str());
}

std::string trace_csv(const RestorationRun& run) {
  std::string out =
      "minute,zone,microgrid,demand_kw,served_kw,unserved_kw,pv_available_kw,pv_used_kw,pv_curtailed_kw,switching\n";
  for (const auto& t : run.trace)
    for (std::size_t i = 0; i < run.graph.node_count(); ++i)
      out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", t.minute, run.graph.nodes()[i].id, t.assignment[i] + 1,
                         num(t.demand_kw[i]), num(t.served_kw[i]), num(t.unserved_kw[i]), num(t.pv_available_kw[i]),
                         num(t.pv_used_kw[i]), num(t.pv_curtailed_kw[i]), t.switching[i]);
  return out;
}

std::string microgrids_csv(const RestorationRun& run) {
  const auto gfms = run.graph.gfm_nodes();
  std::string out = "minute,microgrid,gfm_node,served_kw,pv_used_kw,battery_kw,diesel_kw,soc_kwh,fuel_kwh\n";
  for (const auto& t : run.trace) {
    for (std::size_t k = 0; k < gfms.size(); ++k) {
      double served = 0.0, pv = 0.0;
      for (std::size_t i = 0; i < run.graph.node_count(); ++i) {
        if (t.assignment[i] != static_cast<int>(k)) continue;
        served += t.served_kw[i];
        pv += t.pv_used_kw[i];
      }
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", t.minute, k + 1, gfms[k], num(served), num(pv),
                         num(t.battery_kw[k]), num(t.diesel_kw[k]), num(t.soc_kwh[k]), num(t.fuel_kwh[k]));
    }
  }
  return out;
}

std::string topology_changes_csv(const RestorationRun& run) {
  std::string out = "minute,zones,from_microgrid,to_microgrid\n";
  for (const auto& c : diff_topologies(run)) out += fmt::format("{},{},{},{}\n", c.minute, join(c.zones), c.from, c.to);
  return out;
}

std::string formation_csv(const RestorationRun& run) {
  const auto gfms = run.graph.gfm_nodes();
  std::string out = "minute,optimized,objective,shed_term,flow_term,switch_term,closed_edges";
  for (std::size_t k = 0; k < gfms.size(); ++k) out += fmt::format(",microgrid_{}_zones", k + 1);
  out += ",node_count,lp_iterations\n";
  for (const auto& ev : run.formations) {
    const auto& sol = ev.solution;
    out += fmt::format("{},{},{},{},{},{},{}", ev.minute, ev.optimized ? 1 : 0, num(sol.objective_value),
                       num(sol.load_shed_term), num(sol.flow_term), num(sol.switch_term), join(sol.closed_edges(run.graph)));
    for (std::size_t k = 0; k < gfms.size(); ++k) out += "," + join(sol.members(run.graph, static_cast<int>(k)));
    out += fmt::format(",{},{}\n", ev.node_count, ev.lp_iterations);
  }
  return out;
}

std::map<std::string, std::string> figure_csvs(const RestorationRun& run, const MetricsSummary& s) {
  const auto& g = run.graph;
  const auto gfms = g.gfm_nodes();
  std::set<int> feeders;
  for (const auto& n : g.nodes()) feeders.insert(n.feeder_id);

  std::string fig5 = "minute";
  for (int f : feeders) fig5 += fmt::format(",feeder{}_load_kw,feeder{}_pv_kw", f, f);
  fig5 += '\n';
  std::string fig6 = "minute";
  for (int gfm : gfms) fig6 += fmt::format(",soc_percent_gfm{},fuel_kwh_gfm{}", gfm, gfm);
  fig6 += '\n';
  std::string fig7 = "minute";
  for (const auto& n : g.nodes()) fig7 += fmt::format(",zone{}_microgrid,zone{}_served", n.id, n.id);
  fig7 += '\n';

  for (const auto& t : run.trace) {
    fig5 += std::to_string(t.minute);
    for (int f : feeders) {
      double load = 0.0, pv = 0.0;
      for (std::size_t i = 0; i < g.node_count(); ++i) {
        if (g.nodes()[i].feeder_id != f) continue;
        load += t.demand_kw[i];
        pv += t.pv_available_kw[i];
      }
      fig5 += "," + num(load) + "," + num(pv);
    }
    fig5 += '\n';

    fig6 += std::to_string(t.minute);
    for (std::size_t k = 0; k < gfms.size(); ++k) {
      const double cap = g.resource_at(gfms[k]).battery_energy_kwh;
      fig6 += "," + num(percent(t.soc_kwh[k], cap, 0.0)) + "," + num(t.fuel_kwh[k]);
    }
    fig6 += '\n';

    fig7 += std::to_string(t.minute);
    for (std::size_t i = 0; i < g.node_count(); ++i)
      fig7 += fmt::format(",{},{}", t.assignment[i] + 1, t.served_kw[i] > 0.0 || t.demand_kw[i] == 0.0 ? 1 : 0);
    fig7 += '\n';
  }

  std::string fig8 = "zone,critical,percent_served\n";
  for (const auto& z : s.zones) fig8 += fmt::format("{},{},{}\n", z.zone, z.critical ? 1 : 0, num(z.percent_served));

  return {{"fig5_load_pv.csv", fig5},
          {"fig6_soc_fuel.csv", fig6},
          {"fig7_connectivity.csv", fig7},
          {"fig8_percent_served.csv", fig8}};
}

void write_run_outputs(const RestorationRun& run, const MetricsSummary& s, const std::filesystem::path& dir,
                       bool emit_plots) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << body;
  };
  write("summary.json", summary_json(s));
  write("trace.csv", trace_csv(run));
  write("microgrids.csv", microgrids_csv(run));
  write("topology_changes.csv", topology_changes_csv(run));
  write("formation.csv", formation_csv(run));
  if (emit_plots)
    for (const auto& [name, body] : figure_csvs(run, s)) write(name, body);
}

}  // namespace gridsplit
