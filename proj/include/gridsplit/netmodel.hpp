#pragma once

// Zone-level model of a multi-feeder distribution system: load zones joined by
// switchable edges, grid-forming resources, and faulted edges.

#include <set>
#include <span>
#include <string>
#include <vector>

namespace gridsplit {

struct ZoneNode {
  int id = 0;
  int feeder_id = 0;
  bool is_critical = false;
  double peak_load_kw = 0.0;
  double pv_rating_kw = 0.0;
  bool has_gfm = false;
};

struct SwitchEdge {
  int id = 0;
  int from = 0;
  int to = 0;
  bool normally_open = false;
  double flow_limit_kw = 0.0;
};

struct GridFormingResource {
  int node_id = 0;
  double battery_power_kw = 0.0;
  double battery_energy_kwh = 0.0;
  double battery_soc0 = 1.0;
  double battery_efficiency = 0.95;  // applied on charge
  double diesel_power_kw = 0.0;
  double diesel_fuel_kwh = 0.0;

  double source_power_kw() const { return battery_power_kw + diesel_power_kw; }
};

// Lower bound on the fictitious commodity leaving a GFM along one incident
// edge. force_zero keeps the edge's branch out of the GFM's microgrid.
struct LateralPolicy {
  int gfm_node_id = 0;
  int edge_id = 0;
  int min_downstream_nodes = 0;
  bool force_zero = false;

  friend bool operator==(const LateralPolicy&, const LateralPolicy&) = default;
};

class ZoneGraph {
 public:
  ZoneGraph() = default;

  // Throws ModelError when any structural invariant is violated.
  ZoneGraph(std::vector<ZoneNode> nodes, std::vector<SwitchEdge> edges,
            std::vector<GridFormingResource> resources, std::set<int> faulted_edges = {},
            std::vector<LateralPolicy> lateral_policies = {});

  const std::vector<ZoneNode>& nodes() const { return nodes_; }
  const std::vector<SwitchEdge>& edges() const { return edges_; }
  const std::vector<GridFormingResource>& resources() const { return resources_; }
  const std::set<int>& faulted_edges() const { return faulted_; }
  const std::vector<LateralPolicy>& lateral_policies() const { return policies_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  bool has_node(int id) const;
  bool has_edge(int id) const;
  std::size_t node_index(int id) const;
  std::size_t edge_index(int id) const;
  const ZoneNode& node(int id) const { return nodes_[node_index(id)]; }
  const SwitchEdge& edge(int id) const { return edges_[edge_index(id)]; }
  bool is_faulted(int edge_id) const { return faulted_.contains(edge_id); }

  // Edge indices touching the node at `node_idx`.
  std::span<const std::size_t> incident(std::size_t node_idx) const { return adjacency_[node_idx]; }

  // GFM node ids in ascending order; microgrid k is anchored at gfm_nodes()[k].
  std::vector<int> gfm_nodes() const;
  const GridFormingResource& resource_at(int node_id) const;

  ZoneGraph with_faults(std::set<int> faulted) const;
  ZoneGraph with_policies(std::vector<LateralPolicy> policies) const;

 private:
  void validate_and_index();

  std::vector<ZoneNode> nodes_;
  std::vector<SwitchEdge> edges_;
  std::vector<GridFormingResource> resources_;
  std::set<int> faulted_;
  std::vector<LateralPolicy> policies_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

// Components (faulted edges removed, every other switch closed) holding no GFM.
std::vector<std::set<int>> load_islands(const ZoneGraph& g);
std::set<int> island_nodes(const ZoneGraph& g);

// Deterministic spanning tree (grown in edge-id order) of every load
// island; these edges stay closed so the radiality count holds with islands.
std::set<int> island_spanning_edges(const ZoneGraph& g);

// Endpoints of normally-open edges.
std::set<int> leaf_nodes(const ZoneGraph& g);

// Normally-closed, non-faulted edge ids.
std::set<int> default_closed_edges(const ZoneGraph& g);

struct MicrogridTree {
  int gfm_node = 0;
  std::set<int> nodes;
};

struct ForestCensus {
  bool radial = false;
  std::vector<MicrogridTree> trees;  // one per GFM, ordered like gfm_nodes()
  std::string reason;                // why the check failed, empty when radial
};

// Closed-edge subgraph is acyclic, each GFM tree has exactly one GFM, and every
// zone outside a load island hangs off some GFM.
ForestCensus is_radial_forest(const ZoneGraph& g, const std::set<int>& closed);

// Radiality count |V| - |Pi| - |R|.
int radial_edge_count(const ZoneGraph& g);

}  // namespace gridsplit
