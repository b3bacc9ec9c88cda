#pragma once

// Per-microgrid energy management between formation events: a slot scheduler
// that commits zones and plans battery/diesel/PV, and a fine-step dispatcher
// that follows the plan against realized load and PV.
//
// The coordinator only talks to EnergyManager, so an EMS can be swapped
// without touching formation.

#include <map>
#include <set>
#include <vector>

#include "gridsplit/netmodel.hpp"
#include "gridsplit/profiles.hpp"

namespace gridsplit {

struct MicrogridState {
  int microgrid_id = 0;
  GridFormingResource resource;  // stays with its GFM node
  std::set<int> member_zones;
  double soc_kwh = 0.0;
  double fuel_kwh = 0.0;
  std::map<int, bool> served;
  // Zones that just changed microgrid are dark until this minute.
  std::map<int, int> switching_until_minute;
};

MicrogridState initial_state(int microgrid_id, const GridFormingResource& resource);

// Tree of one microgrid rooted at its GFM.
struct MicrogridTopology {
  int gfm_node = 0;
  std::map<int, int> parent;  // zone -> next zone towards the GFM (absent for the GFM)
  std::map<int, int> depth;   // hops from the GFM
  std::set<int> critical;

  std::vector<int> path_to_gfm(int zone) const;  // zone first, GFM last
};

// Throws TopologyMismatch when a member zone has no closed path to the GFM
// inside the member set.
MicrogridTopology microgrid_topology(const ZoneGraph& g, const std::set<int>& closed_edges,
                                     const MicrogridState& state);

struct PlanSlot {
  std::map<int, bool> committed;
  std::set<int> energized;  // committed zones, their paths, and the GFM zone
  double battery_kw = 0.0;  // discharge positive, charge negative
  double diesel_kw = 0.0;
  std::map<int, double> pv_used_kw;
  std::map<int, double> pv_curtailed_kw;
  double served_load_kw = 0.0;
  double soc_end_kwh = 0.0;
  double fuel_end_kwh = 0.0;
};

struct SchedulePlan {
  int microgrid_id = 0;
  int start_minute = 0;
  int slot_minutes = 30;
  std::vector<int> rank;  // service priority, best first
  std::vector<PlanSlot> slots;

  const PlanSlot& slot_at(int minute) const;
};

struct DispatchStep {
  int minute = 0;
  std::map<int, double> demand_kw;
  std::map<int, double> served_kw;
  std::map<int, double> unserved_kw;
  std::map<int, double> pv_available_kw;
  std::map<int, double> pv_used_kw;
  std::map<int, double> pv_curtailed_kw;
  std::set<int> energized;
  double battery_kw = 0.0;
  double diesel_kw = 0.0;
  double soc_kwh = 0.0;  // after the step
  double fuel_kwh = 0.0;
};

struct DispatchRecord {
  int microgrid_id = 0;
  std::vector<DispatchStep> steps;
};

class EnergyManager {
 public:
  virtual ~EnergyManager() = default;
  // `forecast` is on the slot grid and starts at the plan start.
  virtual SchedulePlan schedule(const MicrogridState& state, const MicrogridTopology& topology,
                                const ZoneProfiles& forecast) const = 0;
  // `actuals` is on the dispatch grid; the state is advanced in place.
  virtual DispatchRecord dispatch(MicrogridState& state, const SchedulePlan& plan, const MicrogridTopology& topology,
                                  const ZoneProfiles& actuals) const = 0;
};

struct GreedyEmsOptions {
  // Hold back stored energy for future critical deficits before committing
  // non-critical zones.
  bool critical_reserve = true;
};

class GreedyEms final : public EnergyManager {
 public:
  explicit GreedyEms(GreedyEmsOptions options = {}) : options_(options) {}

  SchedulePlan schedule(const MicrogridState& state, const MicrogridTopology& topology,
                        const ZoneProfiles& forecast) const override;
  DispatchRecord dispatch(MicrogridState& state, const SchedulePlan& plan, const MicrogridTopology& topology,
                          const ZoneProfiles& actuals) const override;

 private:
  GreedyEmsOptions options_;
};

// Critical first, then hops from the GFM, then zone id.
std::vector<int> service_rank(const MicrogridTopology& topology, const std::set<int>& members);

}  // namespace gridsplit
