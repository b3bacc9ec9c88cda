#include "gridsplit/coordinator.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>
#include <tuple>

#include <spdlog/spdlog.h>

namespace gridsplit {

std::string to_string(Mode m) { return m == Mode::Flexible ? "flexible" : "fixed"; }

Mode parse_mode(const std::string& s) {
  if (s == "flexible") return Mode::Flexible;
  if (s == "fixed") return Mode::Fixed;
  throw std::invalid_argument("mode must be 'flexible' or 'fixed', got '" + s + "'");
}

ZoneProfiles make_forecast(const ZoneProfiles& actuals, double sigma, std::uint64_t seed) {
  ZoneProfiles f = actuals;
  if (sigma <= 0.0) return f;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto* table : {&f.load_kw, &f.pv_kw})
    for (auto& [zone, series] : *table)
      for (double& v : series) v = std::max(0.0, v * (1.0 + noise(rng)));
  return f;
}

FormationSnapshot formation_snapshot(const Scenario& sc, const ZoneGraph& g, const ZoneProfiles& forecast, int minute,
                                     const std::vector<MicrogridState>& states) {
  const auto& tl = sc.timeline;
  const auto agg = forecast.window(minute, minute + tl.formation_step, tl.formation_step,
                                   sc.formation.use_max_aggregation);
  FormationSnapshot snap;
  snap.step_index = minute / tl.formation_step;
  for (const auto& n : g.nodes()) {
    snap.zone_load_kw.push_back(agg.load_kw.at(n.id).at(0));
    snap.zone_pv_kw.push_back(agg.pv_kw.at(n.id).at(0));
  }
  if (sc.formation.energy_aware_source_limit) {
    const double hours = std::min(tl.formation_horizon, tl.total_duration - minute) / 60.0;
    for (const auto& s : states)
      snap.source_limit_kw.push_back(std::min(s.resource.source_power_kw(), (s.soc_kwh + s.fuel_kwh) / hours));
  }
  return snap;
}

namespace {

void export_model(const std::filesystem::path& dir, int minute, const ZoneGraph& g, const FormationSnapshot& snap,
                  const FormationWeights& w, const FormationSolution* previous) {
  std::filesystem::create_directories(dir);
  const auto milp = build_milp(g, snap, w, previous);
  std::ofstream out(dir / ("formation_" + std::to_string(minute) + ".lp"));
  write_lp_format(milp.model, out);
}

}  // namespace

RestorationRun run(const Scenario& sc, Mode mode, const RunOptions& options) {
  validate_scenario(sc);
  const auto& tl = sc.timeline;
  const GreedyEms default_ems(GreedyEmsOptions{sc.ems.critical_reserve});
  const EnergyManager& ems = options.ems ? *options.ems : default_ems;
  const auto forecast = make_forecast(sc.profiles, sc.ems.forecast_noise_sigma, options.seed.value_or(sc.seed));

  auto out = std::make_shared<RestorationRun>();
  RestorationRun& r = *out;
  r.scenario_name = sc.name;
  r.fingerprint = scenario_fingerprint(sc);
  r.mode = mode;
  r.graph = sc.graph;
  r.dispatch_step = tl.dispatch_step;

  const auto gfms = sc.graph.gfm_nodes();
  const std::size_t nz = sc.graph.node_count();
  std::vector<MicrogridState> states;
  for (std::size_t k = 0; k < gfms.size(); ++k)
    states.push_back(initial_state(static_cast<int>(k), sc.graph.resource_at(gfms[k])));

  try {
    const auto initial = fixed_topology_solution(sc.graph_at(0));
    r.default_assignment = initial.assignment;
    std::vector<int> assignment = initial.assignment;
    FormationSolution previous = initial;
    std::set<int> last_faults;
    bool have_topology = false;

    for (int t = 0; t < tl.total_duration; t += tl.formation_step) {
      const int block_end = std::min(t + tl.formation_step, tl.total_duration);
      const auto faults = sc.faults_at(t);
      const auto g = sc.graph.with_faults(faults);

      // Formation event.
      FormationEvent ev;
      ev.minute = t;
      ev.faulted = faults;
      ev.snapshot = formation_snapshot(sc, g, forecast, t, states);
      const bool refresh = mode == Mode::Flexible || !have_topology || faults != last_faults;
      if (refresh) {
        if (mode == Mode::Flexible) {
          if (!options.export_lp_dir.empty()) export_model(options.export_lp_dir, t, g, ev.snapshot, sc.weights, &previous);
          const auto milp = build_milp(g, ev.snapshot, sc.weights, &previous);
          const auto report = solve_milp(milp.model, options.solver);
          if (report.status == SolveStatus::Infeasible)
            throw InfeasibleTopology("formation at minute " + std::to_string(t) + " is infeasible");
          if (report.status != SolveStatus::Optimal)
            throw SolverLimit("formation at minute " + std::to_string(t) + ": " + to_string(report.status));
          ev.solution = decode(report, milp, g, ev.snapshot, sc.weights, &previous);
          ev.optimized = true;
          ev.node_count = report.node_count;
          ev.lp_iterations = report.lp_iterations;
          ev.wall_seconds = report.wall_time.count();
          spdlog::debug("formation t={} obj={:.4f} nodes={} iters={} {:.3f}s", t, ev.solution.objective_value,
                        report.node_count, report.lp_iterations, ev.wall_seconds);
        } else {
          ev.solution = fixed_topology_solution(g, ev.snapshot, sc.weights);
        }
        previous = ev.solution;
        last_faults = faults;
        have_topology = true;

        for (auto& s : states) s.switching_until_minute.clear();
        for (std::size_t i = 0; i < nz; ++i) {
          const int zone = sc.graph.nodes()[i].id;
          const int k = ev.solution.assignment[i];
          if (k >= 0 && k != assignment[i]) states[k].switching_until_minute[zone] = t + tl.dispatch_step;
        }
        assignment = ev.solution.assignment;
        for (std::size_t k = 0; k < states.size(); ++k) {
          states[k].member_zones = ev.solution.members(g, static_cast<int>(k));
          std::erase_if(states[k].served, [&](const auto& kv) { return !states[k].member_zones.contains(kv.first); });
        }
        r.formations.push_back(ev);
      }

      // Schedule each microgrid for the block, then dispatch window by window.
      const auto closed = previous.closed_edges(g);
      const auto slots = forecast.window(t, std::min(t + tl.schedule_horizon, tl.total_duration), tl.schedule_step);
      std::vector<MicrogridTopology> topo;
      std::vector<SchedulePlan> plans;
      for (auto& s : states) {
        topo.push_back(microgrid_topology(g, closed, s));
        plans.push_back(ems.schedule(s, topo.back(), slots));
      }

      for (int w = t; w < block_end; w += tl.dispatch_horizon) {
        const auto actual = sc.profiles.window(w, std::min(w + tl.dispatch_horizon, block_end), tl.dispatch_step);
        std::vector<DispatchRecord> recs;
        for (std::size_t k = 0; k < states.size(); ++k) recs.push_back(ems.dispatch(states[k], plans[k], topo[k], actual));

        for (std::size_t i = 0; i < actual.length(); ++i) {
          TraceStep ts;
          ts.minute = w + static_cast<int>(i) * tl.dispatch_step;
          ts.assignment = assignment;
          ts.switch_status = previous.switch_status;
          ts.switching.assign(nz, 0);
          for (const auto& n : sc.graph.nodes()) {
            const double load = actual.load_kw.at(n.id)[i];
            ts.demand_kw.push_back(load);
            ts.served_kw.push_back(0.0);
            ts.unserved_kw.push_back(load);
            ts.pv_available_kw.push_back(actual.pv_kw.at(n.id)[i]);
            ts.pv_used_kw.push_back(0.0);
            ts.pv_curtailed_kw.push_back(0.0);
          }
          for (std::size_t k = 0; k < states.size(); ++k) {
            const auto& d = recs[k].steps.at(i);
            for (const auto& [zone, served] : d.served_kw) {
              const auto zi = sc.graph.node_index(zone);
              ts.served_kw[zi] = served;
              ts.unserved_kw[zi] = d.unserved_kw.at(zone);
              ts.pv_used_kw[zi] = d.pv_used_kw.at(zone);
              ts.pv_curtailed_kw[zi] = d.pv_curtailed_kw.at(zone);
            }
            for (const auto& [zone, until] : states[k].switching_until_minute)
              if (ts.minute < until) ts.switching[sc.graph.node_index(zone)] = 1;
            ts.battery_kw.push_back(d.battery_kw);
            ts.diesel_kw.push_back(d.diesel_kw);
            ts.soc_kwh.push_back(d.soc_kwh);
            ts.fuel_kwh.push_back(d.fuel_kwh);
          }
          r.trace.push_back(std::move(ts));
        }
      }
    }
  } catch (const std::exception& e) {
    r.final_states = states;
    throw RunAborted(e.what(), out, std::current_exception());
  }
  r.final_states = states;
  return std::move(r);
}

std::vector<TopologyChange> diff_topologies(const RestorationRun& run) {
  std::vector<TopologyChange> out;
  auto current = run.default_assignment;
  for (const auto& ev : run.formations) {
    std::map<std::pair<int, int>, std::set<int>> moves;
    for (std::size_t i = 0; i < current.size(); ++i) {
      const int next = ev.solution.assignment[i];
      if (next != current[i]) moves[{current[i] + 1, next + 1}].insert(run.graph.nodes()[i].id);
    }
    for (auto& [fromto, zones] : moves) out.push_back({ev.minute, std::move(zones), fromto.first, fromto.second});
    current = ev.solution.assignment;
  }
  return out;
}

}  // namespace gridsplit
