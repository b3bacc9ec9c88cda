#include "gridsplit/ems.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>
#include <tuple>

#include "gridsplit/errors.hpp"

namespace gridsplit {

MicrogridState initial_state(int microgrid_id, const GridFormingResource& resource) {
  MicrogridState s;
  s.microgrid_id = microgrid_id;
  s.resource = resource;
  s.member_zones = {resource.node_id};
  s.soc_kwh = resource.battery_soc0 * resource.battery_energy_kwh;
  s.fuel_kwh = resource.diesel_fuel_kwh;
  return s;
}

std::vector<int> MicrogridTopology::path_to_gfm(int zone) const {
  std::vector<int> path{zone};
  for (auto it = parent.find(zone); it != parent.end(); it = parent.find(it->second)) path.push_back(it->second);
  return path;
}

MicrogridTopology microgrid_topology(const ZoneGraph& g, const std::set<int>& closed_edges,
                                     const MicrogridState& state) {
  MicrogridTopology t;
  t.gfm_node = state.resource.node_id;
  if (!state.member_zones.contains(t.gfm_node))
    throw TopologyMismatch("microgrid " + std::to_string(state.microgrid_id) + " does not contain its GFM zone");
  t.depth[t.gfm_node] = 0;
  std::deque<int> queue{t.gfm_node};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (auto e : g.incident(g.node_index(u))) {
      const auto& edge = g.edges()[e];
      if (!closed_edges.contains(edge.id)) continue;
      const int w = edge.from == u ? edge.to : edge.from;
      if (!state.member_zones.contains(w) || t.depth.contains(w)) continue;
      t.depth[w] = t.depth[u] + 1;
      t.parent[w] = u;
      queue.push_back(w);
    }
  }
  for (int z : state.member_zones) {
    if (!t.depth.contains(z))
      throw TopologyMismatch("zone " + std::to_string(z) + " cannot reach GFM " + std::to_string(t.gfm_node));
    if (g.node(z).is_critical) t.critical.insert(z);
  }
  return t;
}

const PlanSlot& SchedulePlan::slot_at(int minute) const {
  const int idx = (minute - start_minute) / slot_minutes;
  if (minute < start_minute || idx >= static_cast<int>(slots.size()))
    throw std::out_of_range("plan does not cover minute " + std::to_string(minute));
  return slots[idx];
}

std::vector<int> service_rank(const MicrogridTopology& topology, const std::set<int>& members) {
  std::vector<int> rank(members.begin(), members.end());
  auto key = [&](int z) { return std::make_tuple(!topology.critical.contains(z), topology.depth.at(z), z); };
  std::sort(rank.begin(), rank.end(), [&](int a, int b) { return key(a) < key(b); });
  return rank;
}

namespace {

struct Headroom {
  double discharge = 0.0;
  double charge = 0.0;
  double diesel = 0.0;
};

Headroom headroom(const GridFormingResource& r, double soc, double fuel, double hours) {
  return {std::min(r.battery_power_kw, soc / hours),
          std::min(r.battery_power_kw, std::max(0.0, r.battery_energy_kwh - soc) / (r.battery_efficiency * hours)),
          std::min(r.diesel_power_kw, fuel / hours)};
}

void apply_energy(const GridFormingResource& r, double battery_kw, double diesel_kw, double hours, double& soc,
                  double& fuel) {
  soc -= battery_kw > 0.0 ? battery_kw * hours : battery_kw * r.battery_efficiency * hours;
  soc = std::clamp(soc, 0.0, r.battery_energy_kwh);
  fuel = std::max(0.0, fuel - diesel_kw * hours);
}

std::set<int> energized_by(const MicrogridTopology& t, const std::set<int>& served) {
  std::set<int> out{t.gfm_node};
  for (int z : served)
    for (int p : t.path_to_gfm(z)) out.insert(p);
  return out;
}

double value_at(const std::map<int, std::vector<double>>& series, int zone, std::size_t i) {
  const auto it = series.find(zone);
  return it == series.end() || i >= it->second.size() ? 0.0 : it->second[i];
}

// Curtailment shared in proportion to each energized zone's PV.
std::map<int, double> share_curtailment(const std::map<int, double>& pv, double curtail) {
  double total = 0.0;
  for (const auto& [z, p] : pv) total += p;
  std::map<int, double> out;
  for (const auto& [z, p] : pv) out[z] = total > 0.0 ? curtail * p / total : 0.0;
  return out;
}

}  // namespace

SchedulePlan GreedyEms::schedule(const MicrogridState& state, const MicrogridTopology& topology,
                                 const ZoneProfiles& forecast) const {
  const auto& res = state.resource;
  SchedulePlan plan;
  plan.microgrid_id = state.microgrid_id;
  plan.start_minute = forecast.start_minute;
  plan.slot_minutes = forecast.step_minutes;
  plan.rank = service_rank(topology, state.member_zones);
  const double hours = forecast.step_minutes / 60.0;
  const std::size_t n_slots = forecast.length();

  auto load = [&](int z, std::size_t s) { return value_at(forecast.load_kw, z, s); };
  auto pv = [&](int z, std::size_t s) { return value_at(forecast.pv_kw, z, s); };

  // reserve_after[s]: storage energy the critical zones alone would need in
  // the slots after s.
  std::vector<double> reserve_after(n_slots + 1, 0.0);
  if (options_.critical_reserve) {
    const auto crit_energized = energized_by(topology, topology.critical);
    for (std::size_t s = n_slots; s-- > 1;) {
      double deficit = 0.0;
      for (int z : topology.critical) deficit += load(z, s);
      for (int z : crit_energized) deficit -= pv(z, s);
      reserve_after[s - 1] = reserve_after[s] + std::max(0.0, deficit) * hours;
    }
  }

  double soc = state.soc_kwh;
  double fuel = state.fuel_kwh;
  for (std::size_t s = 0; s < n_slots; ++s) {
    const auto room = headroom(res, soc, fuel, hours);
    std::set<int> committed;
    std::set<int> energized{topology.gfm_node};
    double served = 0.0;
    double net = -pv(topology.gfm_node, s);

    std::set<int> trial;
    for (int z : plan.rank) {
      trial.insert(z);
      const auto trial_energized = energized_by(topology, trial);
      double trial_load = 0.0;
      for (int c : trial) trial_load += load(c, s);
      double trial_net = trial_load;
      for (int e : trial_energized) trial_net -= pv(e, s);
      bool ok = trial_net <= room.discharge + room.diesel + 1e-9;
      if (ok && options_.critical_reserve && !topology.critical.contains(z) && trial_net > 0.0)
        ok = soc + fuel - trial_net * hours >= reserve_after[s] - 1e-9;
      if (!ok) break;
      committed = trial;
      energized = trial_energized;
      served = trial_load;
      net = trial_net;
    }

    PlanSlot slot;
    for (int z : state.member_zones) slot.committed[z] = committed.contains(z);
    slot.energized = energized;
    slot.served_load_kw = served;
    double curtail = 0.0;
    if (net > 0.0) {
      slot.battery_kw = std::min(net, room.discharge);
      slot.diesel_kw = std::max(0.0, net - slot.battery_kw);
    } else {
      const double charge = std::min(-net, room.charge);
      slot.battery_kw = -charge;
      curtail = -net - charge;
    }
    std::map<int, double> avail;
    for (int z : energized) avail[z] = pv(z, s);
    const auto cut = share_curtailment(avail, curtail);
    for (const auto& [z, p] : avail) {
      slot.pv_curtailed_kw[z] = cut.at(z);
      slot.pv_used_kw[z] = p - cut.at(z);
    }
    apply_energy(res, slot.battery_kw, slot.diesel_kw, hours, soc, fuel);
    slot.soc_end_kwh = soc;
    slot.fuel_end_kwh = fuel;
    plan.slots.push_back(std::move(slot));
  }
  return plan;
}

DispatchRecord GreedyEms::dispatch(MicrogridState& state, const SchedulePlan& plan, const MicrogridTopology& topology,
                                   const ZoneProfiles& actuals) const {
  const auto& res = state.resource;
  const double hours = actuals.step_minutes / 60.0;
  DispatchRecord record;
  record.microgrid_id = state.microgrid_id;

  std::set<int> shed;
  int current_slot = -1;
  for (std::size_t i = 0; i < actuals.length(); ++i) {
    const int minute = actuals.start_minute + static_cast<int>(i) * actuals.step_minutes;
    const auto& slot = plan.slot_at(minute);
    const int slot_index = (minute - plan.start_minute) / plan.slot_minutes;
    if (slot_index != current_slot) {
      shed.clear();
      current_slot = slot_index;
    }

    auto dark = [&](int z) {
      const auto it = state.switching_until_minute.find(z);
      return it != state.switching_until_minute.end() && minute < it->second;
    };
    auto load = [&](int z) { return value_at(actuals.load_kw, z, i); };
    auto pv = [&](int z) { return value_at(actuals.pv_kw, z, i); };

    std::set<int> serving;
    for (const auto& [z, on] : slot.committed) {
      if (!on || shed.contains(z) || !state.member_zones.contains(z)) continue;
      const auto path = topology.path_to_gfm(z);
      if (std::none_of(path.begin(), path.end(), dark)) serving.insert(z);
    }

    const auto room = headroom(res, state.soc_kwh, state.fuel_kwh, hours);
    std::set<int> energized;
    double battery = 0.0, diesel = 0.0, curtail = 0.0;
    while (true) {
      energized = energized_by(topology, serving);
      double net = 0.0;
      for (int z : serving) net += load(z);
      for (int z : energized) net -= pv(z);

      const double planned_diesel = std::min(slot.diesel_kw, room.diesel);
      battery = std::clamp(net - planned_diesel, -room.charge, room.discharge);
      const double rest = net - planned_diesel - battery;
      diesel = planned_diesel + rest;
      curtail = 0.0;
      if (diesel < 0.0) {
        curtail = -diesel;
        diesel = 0.0;
      }
      if (diesel <= room.diesel + 1e-9) {
        diesel = std::min(diesel, room.diesel);
        battery = net + curtail - diesel;
        break;
      }
      // Out of headroom: drop the lowest-ranked zone that actually draws power.
      int victim = -1;
      for (auto it = plan.rank.rbegin(); it != plan.rank.rend(); ++it) {
        if (!serving.contains(*it)) continue;
        if (victim < 0) victim = *it;
        if (load(*it) - pv(*it) > 0.0) {
          victim = *it;
          break;
        }
      }
      serving.erase(victim);
      shed.insert(victim);
      // A dropped critical zone takes every non-critical zone at its depth or deeper with it.
      if (topology.critical.contains(victim))
        for (int z : std::set<int>(serving))
          if (!topology.critical.contains(z) && topology.depth.at(z) >= topology.depth.at(victim)) {
            serving.erase(z);
            shed.insert(z);
          }
    }

    DispatchStep step;
    step.minute = minute;
    step.energized = energized;
    std::map<int, double> avail;
    for (int z : energized) avail[z] = pv(z);
    const auto cut = share_curtailment(avail, curtail);
    for (int z : state.member_zones) {
      step.demand_kw[z] = load(z);
      step.served_kw[z] = serving.contains(z) ? load(z) : 0.0;
      step.unserved_kw[z] = step.demand_kw[z] - step.served_kw[z];
      step.pv_available_kw[z] = pv(z);
      step.pv_used_kw[z] = energized.contains(z) ? pv(z) - cut.at(z) : 0.0;
      step.pv_curtailed_kw[z] = energized.contains(z) ? cut.at(z) : 0.0;
      state.served[z] = serving.contains(z);
    }
    step.battery_kw = battery;
    step.diesel_kw = diesel;
    apply_energy(res, battery, diesel, hours, state.soc_kwh, state.fuel_kwh);
    step.soc_kwh = state.soc_kwh;
    step.fuel_kwh = state.fuel_kwh;
    record.steps.push_back(std::move(step));
  }
  return record;
}

}  // namespace gridsplit
