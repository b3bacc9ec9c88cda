#include "support.hpp"

namespace gridsplit::testing {

FormationSnapshot fixture_snapshot(const Scenario& sc, int step) {
  const int minute = step * sc.timeline.formation_step;
  const auto agg = sc.profiles.window(minute, minute + sc.timeline.formation_step, sc.timeline.formation_step);
  FormationSnapshot s;
  s.step_index = step;
  for (const auto& n : sc.graph.nodes()) {
    s.zone_load_kw.push_back(agg.load_kw.at(n.id)[0]);
    s.zone_pv_kw.push_back(agg.pv_kw.at(n.id)[0]);
  }
  return s;
}

FormationSnapshot random_snapshot(const Scenario& sc, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> step(0, sc.timeline.formation_events() - 1);
  std::uniform_real_distribution<double> load_factor(0.5, 1.5), pv_factor(0.0, 1.0);
  auto s = fixture_snapshot(sc, step(rng));
  for (std::size_t i = 0; i < sc.graph.node_count(); ++i) {
    s.zone_load_kw[i] *= load_factor(rng);
    s.zone_pv_kw[i] = pv_factor(rng) * sc.graph.nodes()[i].pv_rating_kw;
  }
  // Tight sources so that shedding, not only the flow term, matters.
  for (int gfm : sc.graph.gfm_nodes()) {
    std::uniform_real_distribution<double> cap(0.1, 1.0);
    s.source_limit_kw.push_back(cap(rng) * sc.graph.resource_at(gfm).source_power_kw() / 3.0);
  }
  return s;
}

Scenario mirrored_scenario(bool zero_pv) {
  Scenario s = fixture_two_feeder();
  s.name = "mirrored";
  std::vector<ZoneNode> nodes;
  const std::set<int> critical{2, 3, 4};
  const double share[5] = {0.15, 0.20, 0.25, 0.20, 0.20};
  for (int id = 1; id <= 10; ++id) {
    const int base = (id - 1) % 5 + 1;
    nodes.push_back({id, id <= 5 ? 1 : 2, critical.contains(base), share[base - 1] * 3000.0,
                     share[base - 1] * 4000.0, base == 1});
  }
  std::vector<SwitchEdge> edges;
  int id = 1;
  for (int off : {0, 5}) {
    edges.push_back({id++, 1 + off, 2 + off, false, 8000.0});
    edges.push_back({id++, 1 + off, 3 + off, false, 8000.0});
    edges.push_back({id++, 3 + off, 4 + off, false, 8000.0});
    edges.push_back({id++, 4 + off, 5 + off, false, 8000.0});
  }
  edges.push_back({id++, 5, 10, true, 8000.0});
  edges.push_back({id++, 2, 7, true, 8000.0});
  GridFormingResource r1{1, 3000.0, 12000.0, 1.0, 0.95, 4000.0, 20000.0};
  GridFormingResource r2 = r1;
  r2.node_id = 6;
  s.graph = ZoneGraph(nodes, edges, {r1, r2}, {}, {{1, 2, 2, false}, {6, 6, 2, false}});
  for (int zone = 6; zone <= 10; ++zone) {
    s.profiles.load_kw[zone] = s.profiles.load_kw[zone - 5];
    s.profiles.pv_kw[zone] = s.profiles.pv_kw[zone - 5];
  }
  if (zero_pv)
    for (auto& [zone, series] : s.profiles.pv_kw) std::fill(series.begin(), series.end(), 0.0);
  return s;
}

Scenario fixture_window(int start, int minutes) {
  Scenario s = fixture_two_feeder();
  s.profiles = s.profiles.window(start, start + minutes, s.profiles.step_minutes);
  s.profiles.start_minute = 0;
  s.timeline.total_duration = minutes;
  return s;
}

ZoneGraph single_feeder(int n) {
  std::vector<ZoneNode> nodes;
  std::vector<SwitchEdge> edges;
  for (int id = 1; id <= n; ++id) {
    nodes.push_back({id, 1, id % 2 == 0, 100.0, 50.0, id == 1});
    if (id > 1) edges.push_back({id - 1, id - 1, id, false, 1000.0});
  }
  return ZoneGraph(nodes, edges, {{1, 500.0, 2000.0, 1.0, 0.95, 500.0, 1000.0}});
}

}  // namespace gridsplit::testing
