#include "gridsplit/netmodel.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <utility>

#include "gridsplit/errors.hpp"

namespace gridsplit {

namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  // False when both were already joined.
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::string str(int v) { return std::to_string(v); }

}  // namespace

ZoneGraph::ZoneGraph(std::vector<ZoneNode> nodes, std::vector<SwitchEdge> edges,
                     std::vector<GridFormingResource> resources, std::set<int> faulted_edges,
                     std::vector<LateralPolicy> lateral_policies)
    : nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      resources_(std::move(resources)),
      faulted_(std::move(faulted_edges)),
      policies_(std::move(lateral_policies)) {
  validate_and_index();
}

void ZoneGraph::validate_and_index() {
  std::set<int> ids;
  for (const auto& n : nodes_) {
    if (!ids.insert(n.id).second) throw ModelError("duplicate node id " + str(n.id));
    if (!(n.peak_load_kw >= 0.0)) throw ModelError("node " + str(n.id) + ": negative peak load");
    if (!(n.pv_rating_kw >= 0.0)) throw ModelError("node " + str(n.id) + ": negative pv rating");
  }

  adjacency_.assign(nodes_.size(), {});
  std::set<int> edge_ids;
  std::set<std::pair<int, int>> pairs;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& edge = edges_[e];
    const std::string tag = "edge " + str(edge.id);
    if (!edge_ids.insert(edge.id).second) throw ModelError("duplicate " + tag);
    if (!has_node(edge.from) || !has_node(edge.to)) throw ModelError(tag + ": unknown endpoint");
    if (edge.from == edge.to) throw ModelError(tag + ": endpoints must differ");
    if (!pairs.insert(std::minmax(edge.from, edge.to)).second)
      throw ModelError(tag + ": parallel edge between " + str(edge.from) + " and " + str(edge.to));
    if (!(edge.flow_limit_kw > 0.0)) throw ModelError(tag + ": flow limit must be positive");
    const bool crosses = node(edge.from).feeder_id != node(edge.to).feeder_id;
    if (crosses != edge.normally_open)
      throw ModelError(tag + ": normally-open edges must be exactly the feeder ties");
    adjacency_[node_index(edge.from)].push_back(e);
    adjacency_[node_index(edge.to)].push_back(e);
  }

  std::set<int> hosts;
  for (const auto& r : resources_) {
    const std::string tag = "resource at node " + str(r.node_id);
    if (!has_node(r.node_id)) throw ModelError(tag + ": unknown node");
    if (!hosts.insert(r.node_id).second) throw ModelError(tag + ": node hosts two resources");
    if (!node(r.node_id).has_gfm) throw ModelError(tag + ": node is not flagged has_gfm");
    if (!(r.battery_power_kw >= 0.0 && r.battery_energy_kwh >= 0.0 && r.diesel_power_kw >= 0.0 &&
          r.diesel_fuel_kwh >= 0.0))
      throw ModelError(tag + ": ratings must be nonnegative");
    if (!(r.battery_soc0 >= 0.0 && r.battery_soc0 <= 1.0)) throw ModelError(tag + ": soc0 outside [0,1]");
    if (!(r.battery_efficiency > 0.0 && r.battery_efficiency <= 1.0))
      throw ModelError(tag + ": efficiency outside (0,1]");
  }
  for (const auto& n : nodes_) {
    if (n.has_gfm && !hosts.contains(n.id))
      throw ModelError("node " + str(n.id) + ": has_gfm without a resource");
  }

  for (int f : faulted_) {
    if (!has_edge(f)) throw ModelError("faulted edge " + str(f) + " does not exist");
  }

  for (const auto& p : policies_) {
    const std::string tag = "lateral policy (gfm " + str(p.gfm_node_id) + ", edge " + str(p.edge_id) + ")";
    if (!has_node(p.gfm_node_id) || !node(p.gfm_node_id).has_gfm) throw ModelError(tag + ": not a GFM node");
    if (!has_edge(p.edge_id)) throw ModelError(tag + ": unknown edge");
    const auto& e = edge(p.edge_id);
    if (e.from != p.gfm_node_id && e.to != p.gfm_node_id) throw ModelError(tag + ": edge not incident to GFM");
    if (p.min_downstream_nodes < 0 || p.min_downstream_nodes > static_cast<int>(nodes_.size()) - 1)
      throw ModelError(tag + ": min_downstream_nodes out of range");
    if (p.force_zero && p.min_downstream_nodes != 0)
      throw ModelError(tag + ": force_zero requires min_downstream_nodes = 0");
  }
}

bool ZoneGraph::has_node(int id) const {
  return std::any_of(nodes_.begin(), nodes_.end(), [id](const ZoneNode& n) { return n.id == id; });
}

bool ZoneGraph::has_edge(int id) const {
  return std::any_of(edges_.begin(), edges_.end(), [id](const SwitchEdge& e) { return e.id == id; });
}

std::size_t ZoneGraph::node_index(int id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].id == id) return i;
  throw ModelError("unknown node id " + str(id));
}

std::size_t ZoneGraph::edge_index(int id) const {
  for (std::size_t i = 0; i < edges_.size(); ++i)
    if (edges_[i].id == id) return i;
  throw ModelError("unknown edge id " + str(id));
}

std::vector<int> ZoneGraph::gfm_nodes() const {
  std::vector<int> out;
  for (const auto& n : nodes_)
    if (n.has_gfm) out.push_back(n.id);
  std::sort(out.begin(), out.end());
  return out;
}

const GridFormingResource& ZoneGraph::resource_at(int node_id) const {
  for (const auto& r : resources_)
    if (r.node_id == node_id) return r;
  throw ModelError("no resource at node " + str(node_id));
}

ZoneGraph ZoneGraph::with_faults(std::set<int> faulted) const {
  return ZoneGraph(nodes_, edges_, resources_, std::move(faulted), policies_);
}

ZoneGraph ZoneGraph::with_policies(std::vector<LateralPolicy> policies) const {
  return ZoneGraph(nodes_, edges_, resources_, faulted_, std::move(policies));
}

std::vector<std::set<int>> load_islands(const ZoneGraph& g) {
  DisjointSet ds(g.node_count());
  for (const auto& e : g.edges()) {
    if (g.is_faulted(e.id)) continue;
    ds.unite(g.node_index(e.from), g.node_index(e.to));
  }
  std::map<std::size_t, std::set<int>> components;
  std::set<std::size_t> powered;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto root = ds.find(i);
    components[root].insert(g.nodes()[i].id);
    if (g.nodes()[i].has_gfm) powered.insert(root);
  }
  std::vector<std::set<int>> islands;
  for (auto& [root, members] : components)
    if (!powered.contains(root)) islands.push_back(std::move(members));
  std::sort(islands.begin(), islands.end(), [](const auto& a, const auto& b) { return *a.begin() < *b.begin(); });
  return islands;
}

std::set<int> island_nodes(const ZoneGraph& g) {
  std::set<int> out;
  for (const auto& island : load_islands(g)) out.insert(island.begin(), island.end());
  return out;
}

std::set<int> island_spanning_edges(const ZoneGraph& g) {
  std::set<int> out;
  std::vector<std::size_t> order(g.edge_count());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return g.edges()[a].id < g.edges()[b].id; });
  for (const auto& island : load_islands(g)) {
    std::set<int> reached{*island.begin()};
    bool grew = true;
    while (grew) {
      grew = false;
      for (auto e : order) {
        const auto& edge = g.edges()[e];
        if (g.is_faulted(edge.id)) continue;
        if (reached.contains(edge.from) != reached.contains(edge.to) && island.contains(edge.from)) {
          reached.insert(edge.from);
          reached.insert(edge.to);
          out.insert(edge.id);
          grew = true;
        }
      }
    }
  }
  return out;
}

std::set<int> leaf_nodes(const ZoneGraph& g) {
  std::set<int> out;
  for (const auto& e : g.edges()) {
    if (!e.normally_open) continue;
    out.insert(e.from);
    out.insert(e.to);
  }
  return out;
}

std::set<int> default_closed_edges(const ZoneGraph& g) {
  std::set<int> out;
  for (const auto& e : g.edges())
    if (!e.normally_open && !g.is_faulted(e.id)) out.insert(e.id);
  return out;
}

ForestCensus is_radial_forest(const ZoneGraph& g, const std::set<int>& closed) {
  ForestCensus census;
  DisjointSet ds(g.node_count());
  for (int id : closed) {
    if (!g.has_edge(id)) {
      census.reason = "edge " + str(id) + " does not exist";
      return census;
    }
    if (g.is_faulted(id)) {
      census.reason = "edge " + str(id) + " is faulted";
      return census;
    }
    const auto& e = g.edge(id);
    if (!ds.unite(g.node_index(e.from), g.node_index(e.to))) {
      census.reason = "edge " + str(id) + " closes a cycle";
      return census;
    }
  }

  std::map<std::size_t, int> gfm_of_root;
  for (int gfm : g.gfm_nodes()) {
    const auto root = ds.find(g.node_index(gfm));
    if (auto [it, fresh] = gfm_of_root.emplace(root, gfm); !fresh) {
      census.reason = "GFM nodes " + str(it->second) + " and " + str(gfm) + " share a tree";
      return census;
    }
    census.trees.push_back({gfm, {}});
  }

  const auto islands = island_nodes(g);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const int id = g.nodes()[i].id;
    const auto it = gfm_of_root.find(ds.find(i));
    if (it == gfm_of_root.end()) {
      if (islands.contains(id)) continue;
      census.trees.clear();
      census.reason = "zone " + str(id) + " is not connected to any GFM";
      return census;
    }
    for (auto& tree : census.trees)
      if (tree.gfm_node == it->second) tree.nodes.insert(id);
  }
  census.radial = true;
  return census;
}

int radial_edge_count(const ZoneGraph& g) {
  return static_cast<int>(g.node_count()) - static_cast<int>(g.gfm_nodes().size()) -
         static_cast<int>(load_islands(g).size());
}

}  // namespace gridsplit
