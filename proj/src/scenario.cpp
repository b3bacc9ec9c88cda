#include "gridsplit/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gridsplit/errors.hpp"

namespace gridsplit {

using nlohmann::json;
using nlohmann::ordered_json;

std::set<int> Scenario::faults_at(int minute) const {
  std::set<int> out;
  for (const auto& f : faults)
    if (f.start_minute <= minute && minute < f.end_minute) out.insert(f.edge_id);
  return out;
}

void Timeline::validate() const {
  auto need = [](bool ok, const char* field, const std::string& msg) {
    if (!ok) throw ValidationError(std::string("/timeline/") + field, msg);
  };
  need(dispatch_step > 0, "dispatch_step_min", "must be positive");
  need(dispatch_horizon > 0 && dispatch_horizon % dispatch_step == 0, "dispatch_horizon_min",
       "must be a positive multiple of dispatch_step_min");
  need(schedule_step > 0 && schedule_step % dispatch_horizon == 0, "schedule_step_min",
       "must be a positive multiple of dispatch_horizon_min");
  need(schedule_horizon >= schedule_step && schedule_horizon % schedule_step == 0, "schedule_horizon_min",
       "must be a multiple of schedule_step_min");
  need(formation_step > 0 && formation_step % schedule_step == 0, "formation_step_min",
       "must be a positive multiple of schedule_step_min");
  need(formation_horizon >= formation_step, "formation_horizon_min", "must cover at least one formation step");
  need(total_duration > 0 && total_duration % dispatch_horizon == 0, "total_duration_min",
       "must be a positive multiple of dispatch_horizon_min");
}

namespace {

// JSON node plus its pointer path, for error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }

  Node at(const std::string& key) const {
    expect_object();
    if (!j_.contains(key)) throw ValidationError(path_ + "/" + key, "missing required field");
    return {j_.at(key), path_ + "/" + key};
  }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }
  Node at(std::size_t i) const { return {j_.at(i), path_ + "/" + std::to_string(i)}; }

  void only(std::initializer_list<const char*> keys) const {
    expect_object();
    for (const auto& [k, v] : j_.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        throw ValidationError(path_ + "/" + k, "unknown field");
    }
  }

  std::size_t size() const {
    if (!j_.is_array()) throw ValidationError(path_, "expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) throw ValidationError(path_, "expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) throw ValidationError(path_, "must be finite");
    return v;
  }
  double nonneg() const {
    const double v = number();
    if (v < 0.0) throw ValidationError(path_, "must be nonnegative");
    return v;
  }
  int integer() const {
    if (!j_.is_number_integer()) throw ValidationError(path_, "expected an integer");
    return j_.get<int>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) throw ValidationError(path_, "expected true or false");
    return j_.get<bool>();
  }
  std::string text() const {
    if (!j_.is_string()) throw ValidationError(path_, "expected a string");
    return j_.get<std::string>();
  }

 private:
  void expect_object() const {
    if (!j_.is_object()) throw ValidationError(path_, "expected an object");
  }
  const json& j_;
  std::string path_;
};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ParseError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

double parse_number(const std::string& cell, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
    throw ParseError(where + ": '" + cell + "' is not a number");
  return v;
}

// Columns: minute, then one column per zone id.
std::map<int, std::vector<double>> read_profile_csv(const std::filesystem::path& p, int step, int& start) {
  std::istringstream in(read_file(p));
  std::string line;
  if (!std::getline(in, line)) throw ParseError(p.string() + ": empty file");
  const auto header = split(line, ',');
  if (header.empty() || header[0] != "minute") throw ParseError(p.string() + ": first column must be 'minute'");
  std::vector<int> zones;
  for (std::size_t c = 1; c < header.size(); ++c)
    zones.push_back(static_cast<int>(parse_number(header[c], p.string() + " header")));
  std::map<int, std::vector<double>> out;
  for (int z : zones) out[z];
  if (out.size() != zones.size()) throw ParseError(p.string() + ": duplicate zone column");

  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const std::string where = p.string() + " row " + std::to_string(row + 2);
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) throw ParseError(where + ": expected " + std::to_string(header.size()) + " cells");
    const int minute = static_cast<int>(parse_number(cells[0], where));
    if (row == 0) start = minute;
    if (minute != start + row * step)
      throw ParseError(where + ": minute " + std::to_string(minute) + " breaks the " + std::to_string(step) +
                       "-minute grid");
    for (std::size_t c = 1; c < cells.size(); ++c) out[zones[c - 1]].push_back(parse_number(cells[c], where));
    ++row;
  }
  return out;
}

ordered_json to_json(const Scenario& s, const std::string& load_csv, const std::string& pv_csv) {
  const auto& g = s.graph;
  ordered_json nodes = ordered_json::array(), edges = ordered_json::array(), res = ordered_json::array(),
               pol = ordered_json::array(), faults = ordered_json::array();
  for (const auto& n : g.nodes())
    nodes.push_back({{"id", n.id},
                     {"feeder_id", n.feeder_id},
                     {"is_critical", n.is_critical},
                     {"peak_load_kw", n.peak_load_kw},
                     {"pv_rating_kw", n.pv_rating_kw},
                     {"has_gfm", n.has_gfm}});
  for (const auto& e : g.edges())
    edges.push_back({{"id", e.id},
                     {"from", e.from},
                     {"to", e.to},
                     {"normally_open", e.normally_open},
                     {"flow_limit_kw", e.flow_limit_kw}});
  for (const auto& r : g.resources())
    res.push_back({{"node_id", r.node_id},
                   {"battery_power_kw", r.battery_power_kw},
                   {"battery_energy_kwh", r.battery_energy_kwh},
                   {"battery_soc0", r.battery_soc0},
                   {"battery_efficiency", r.battery_efficiency},
                   {"diesel_power_kw", r.diesel_power_kw},
                   {"diesel_fuel_kwh", r.diesel_fuel_kwh}});
  for (const auto& p : g.lateral_policies())
    pol.push_back({{"gfm_node_id", p.gfm_node_id},
                   {"edge_id", p.edge_id},
                   {"min_downstream_nodes", p.min_downstream_nodes},
                   {"force_zero", p.force_zero}});
  for (const auto& f : s.faults)
    faults.push_back({{"edge_id", f.edge_id}, {"start_min", f.start_minute}, {"end_min", f.end_minute}});

  const auto& t = s.timeline;
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["network"] = {{"nodes", nodes}, {"edges", edges}, {"resources", res}, {"lateral_policies", pol}, {"faults", faults}};
  j["profiles"] = {{"step_minutes", s.profiles.step_minutes}, {"load_csv", load_csv}, {"pv_csv", pv_csv}};
  j["weights"] = {{"critical_flow_weight", s.weights.critical_flow_weight},
                  {"default_flow_weight", s.weights.default_flow_weight},
                  {"shed_weight", s.weights.shed_weight},
                  {"switch_change_penalty", s.weights.switch_change_penalty}};
  j["timeline"] = {{"formation_horizon_min", t.formation_horizon}, {"formation_step_min", t.formation_step},
                   {"schedule_horizon_min", t.schedule_horizon},   {"schedule_step_min", t.schedule_step},
                   {"dispatch_horizon_min", t.dispatch_horizon},   {"dispatch_step_min", t.dispatch_step},
                   {"total_duration_min", t.total_duration}};
  j["ems"] = {{"forecast_noise_sigma", s.ems.forecast_noise_sigma}, {"critical_reserve", s.ems.critical_reserve}};
  j["formation"] = {{"aggregation", s.formation.use_max_aggregation ? "max" : "mean"},
                    {"energy_aware_source_limit", s.formation.energy_aware_source_limit}};
  return j;
}

ZoneGraph parse_network(const Node& net, std::vector<FaultWindow>& faults) {
  net.only({"nodes", "edges", "resources", "lateral_policies", "faults"});
  std::vector<ZoneNode> nodes;
  std::set<int> node_ids;
  const auto jn = net.at("nodes");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const auto n = jn.at(i);
    n.only({"id", "feeder_id", "is_critical", "peak_load_kw", "pv_rating_kw", "has_gfm"});
    ZoneNode z{n.at("id").integer(),         n.at("feeder_id").integer(),    n.at("is_critical").boolean(),
               n.at("peak_load_kw").nonneg(), n.at("pv_rating_kw").nonneg(), n.at("has_gfm").boolean()};
    if (!node_ids.insert(z.id).second) throw ValidationError(n.path() + "/id", "duplicate node id");
    nodes.push_back(z);
  }
  if (nodes.empty()) throw ValidationError(jn.path(), "at least one node is required");

  std::vector<SwitchEdge> edges;
  std::set<int> edge_ids;
  const auto je = net.at("edges");
  for (std::size_t i = 0; i < je.size(); ++i) {
    const auto e = je.at(i);
    e.only({"id", "from", "to", "normally_open", "flow_limit_kw"});
    SwitchEdge s{e.at("id").integer(), e.at("from").integer(), e.at("to").integer(), e.at("normally_open").boolean(),
                 e.at("flow_limit_kw").number()};
    if (!edge_ids.insert(s.id).second) throw ValidationError(e.path() + "/id", "duplicate edge id");
    if (!node_ids.contains(s.from)) throw ValidationError(e.path() + "/from", "unknown node");
    if (!node_ids.contains(s.to)) throw ValidationError(e.path() + "/to", "unknown node");
    if (s.flow_limit_kw <= 0.0) throw ValidationError(e.path() + "/flow_limit_kw", "must be positive");
    edges.push_back(s);
  }

  std::vector<GridFormingResource> resources;
  const auto jr = net.at("resources");
  for (std::size_t i = 0; i < jr.size(); ++i) {
    const auto r = jr.at(i);
    r.only({"node_id", "battery_power_kw", "battery_energy_kwh", "battery_soc0", "battery_efficiency",
            "diesel_power_kw", "diesel_fuel_kwh"});
    GridFormingResource g;
    g.node_id = r.at("node_id").integer();
    if (!node_ids.contains(g.node_id)) throw ValidationError(r.path() + "/node_id", "unknown node");
    g.battery_power_kw = r.at("battery_power_kw").nonneg();
    g.battery_energy_kwh = r.at("battery_energy_kwh").nonneg();
    if (r.has("battery_soc0")) g.battery_soc0 = r.at("battery_soc0").nonneg();
    if (g.battery_soc0 > 1.0) throw ValidationError(r.path() + "/battery_soc0", "must lie in [0, 1]");
    if (r.has("battery_efficiency")) g.battery_efficiency = r.at("battery_efficiency").number();
    if (g.battery_efficiency <= 0.0 || g.battery_efficiency > 1.0)
      throw ValidationError(r.path() + "/battery_efficiency", "must lie in (0, 1]");
    g.diesel_power_kw = r.at("diesel_power_kw").nonneg();
    g.diesel_fuel_kwh = r.at("diesel_fuel_kwh").nonneg();
    resources.push_back(g);
  }

  std::vector<LateralPolicy> policies;
  if (net.has("lateral_policies")) {
    const auto jp = net.at("lateral_policies");
    for (std::size_t i = 0; i < jp.size(); ++i) {
      const auto p = jp.at(i);
      p.only({"gfm_node_id", "edge_id", "min_downstream_nodes", "force_zero"});
      LateralPolicy lp{p.at("gfm_node_id").integer(), p.at("edge_id").integer(), 0, false};
      if (p.has("min_downstream_nodes")) lp.min_downstream_nodes = p.at("min_downstream_nodes").integer();
      if (p.has("force_zero")) lp.force_zero = p.at("force_zero").boolean();
      if (!edge_ids.contains(lp.edge_id)) throw ValidationError(p.path() + "/edge_id", "unknown edge");
      if (lp.min_downstream_nodes < 0) throw ValidationError(p.path() + "/min_downstream_nodes", "must be nonnegative");
      policies.push_back(lp);
    }
  }

  if (net.has("faults")) {
    const auto jf = net.at("faults");
    for (std::size_t i = 0; i < jf.size(); ++i) {
      const auto f = jf.at(i);
      f.only({"edge_id", "start_min", "end_min"});
      FaultWindow w{f.at("edge_id").integer(), f.at("start_min").integer(), f.at("end_min").integer()};
      if (!edge_ids.contains(w.edge_id)) throw ValidationError(f.path() + "/edge_id", "unknown edge");
      if (w.start_minute < 0) throw ValidationError(f.path() + "/start_min", "must be nonnegative");
      if (w.end_minute <= w.start_minute) throw ValidationError(f.path() + "/end_min", "must be after start_min");
      faults.push_back(w);
    }
  }

  try {
    return ZoneGraph(std::move(nodes), std::move(edges), std::move(resources), {}, std::move(policies));
  } catch (const ModelError& e) {
    throw ValidationError(net.path(), e.what());
  }
}

void check_profiles(const Scenario& s) {
  const auto& p = s.profiles;
  const auto& t = s.timeline;
  if (p.step_minutes != t.dispatch_step)
    throw ValidationError("/profiles/step_minutes", "must equal timeline/dispatch_step_min");
  if (p.start_minute != 0) throw ValidationError("/profiles", "series must start at minute 0");
  auto check = [&](const std::map<int, std::vector<double>>& table, const char* where) {
    const std::string path = std::string("/profiles/") + where;
    for (const auto& n : s.graph.nodes()) {
      const auto it = table.find(n.id);
      if (it == table.end()) throw ValidationError(path, "no column for zone " + std::to_string(n.id));
      const int covered = static_cast<int>(it->second.size()) * p.step_minutes;
      if (covered < t.total_duration)
        throw ValidationError(path, "zone " + std::to_string(n.id) + " covers " + std::to_string(covered) +
                                        " min, the run needs " + std::to_string(t.total_duration));
      for (double v : it->second)
        if (!(v >= 0.0) || !std::isfinite(v))
          throw ValidationError(path, "zone " + std::to_string(n.id) + " has a negative or non-finite value");
    }
    for (const auto& [zone, series] : table) {
      if (!s.graph.has_node(zone)) throw ValidationError(path, "column for unknown zone " + std::to_string(zone));
      if (series.size() != p.length()) throw ValidationError(path, "columns differ in length");
    }
  };
  check(p.load_kw, "load_csv");
  check(p.pv_kw, "pv_csv");
}

}  // namespace

void validate_scenario(const Scenario& s) {
  s.timeline.validate();
  const auto& w = s.weights;
  if (!(w.default_flow_weight > 0.0)) throw ValidationError("/weights/default_flow_weight", "must be positive");
  if (!(w.critical_flow_weight > w.default_flow_weight))
    throw ValidationError("/weights/critical_flow_weight", "must exceed default_flow_weight");
  if (!(w.shed_weight > 0.0)) throw ValidationError("/weights/shed_weight", "must be positive");
  if (!(w.switch_change_penalty >= 0.0)) throw ValidationError("/weights/switch_change_penalty", "must be nonnegative");
  if (!(s.ems.forecast_noise_sigma >= 0.0)) throw ValidationError("/ems/forecast_noise_sigma", "must be nonnegative");
  if (s.graph.gfm_nodes().empty()) throw ValidationError("/network/resources", "at least one GFM is required");
  for (std::size_t i = 0; i < s.faults.size(); ++i)
    if (!s.graph.has_edge(s.faults[i].edge_id))
      throw ValidationError("/network/faults/" + std::to_string(i) + "/edge_id", "unknown edge");
  check_profiles(s);
  // The default topology must stay usable under every fault state of the run.
  std::set<int> starts{0};
  for (const auto& f : s.faults) {
    starts.insert(f.start_minute);
    starts.insert(f.end_minute);
  }
  for (int m : starts) {
    if (m >= s.timeline.total_duration) continue;
    try {
      (void)fixed_topology_solution(s.graph_at(m));
    } catch (const Error& e) {
      throw ValidationError("/network/edges", e.what());
    }
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  const Node root(doc, "");
  root.only({"schema_version", "name", "seed", "network", "profiles", "weights", "timeline", "ems", "formation"});
  if (root.at("schema_version").integer() != kSchemaVersion)
    throw ValidationError("/schema_version", "unsupported version, expected " + std::to_string(kSchemaVersion));

  Scenario s;
  s.name = root.at("name").text();
  if (root.has("seed")) {
    const auto seed = root.at("seed");
    if (!doc.at("seed").is_number_unsigned()) throw ValidationError(seed.path(), "expected a nonnegative integer");
    s.seed = doc.at("seed").get<std::uint64_t>();
  }
  s.graph = parse_network(root.at("network"), s.faults);

  if (root.has("weights")) {
    const auto w = root.at("weights");
    w.only({"critical_flow_weight", "default_flow_weight", "shed_weight", "switch_change_penalty"});
    if (w.has("critical_flow_weight")) s.weights.critical_flow_weight = w.at("critical_flow_weight").number();
    if (w.has("default_flow_weight")) s.weights.default_flow_weight = w.at("default_flow_weight").number();
    if (w.has("shed_weight")) s.weights.shed_weight = w.at("shed_weight").number();
    if (w.has("switch_change_penalty")) s.weights.switch_change_penalty = w.at("switch_change_penalty").number();
  }
  if (root.has("timeline")) {
    const auto t = root.at("timeline");
    t.only({"formation_horizon_min", "formation_step_min", "schedule_horizon_min", "schedule_step_min",
            "dispatch_horizon_min", "dispatch_step_min", "total_duration_min"});
    auto opt = [&](const char* key, int& field) {
      if (t.has(key)) field = t.at(key).integer();
    };
    opt("formation_horizon_min", s.timeline.formation_horizon);
    opt("formation_step_min", s.timeline.formation_step);
    opt("schedule_horizon_min", s.timeline.schedule_horizon);
    opt("schedule_step_min", s.timeline.schedule_step);
    opt("dispatch_horizon_min", s.timeline.dispatch_horizon);
    opt("dispatch_step_min", s.timeline.dispatch_step);
    opt("total_duration_min", s.timeline.total_duration);
  }
  if (root.has("ems")) {
    const auto e = root.at("ems");
    e.only({"forecast_noise_sigma", "critical_reserve"});
    if (e.has("forecast_noise_sigma")) s.ems.forecast_noise_sigma = e.at("forecast_noise_sigma").nonneg();
    if (e.has("critical_reserve")) s.ems.critical_reserve = e.at("critical_reserve").boolean();
  }
  if (root.has("formation")) {
    const auto f = root.at("formation");
    f.only({"aggregation", "energy_aware_source_limit"});
    if (f.has("aggregation")) {
      const auto a = f.at("aggregation").text();
      if (a != "mean" && a != "max") throw ValidationError(f.path() + "/aggregation", "must be 'mean' or 'max'");
      s.formation.use_max_aggregation = a == "max";
    }
    if (f.has("energy_aware_source_limit"))
      s.formation.energy_aware_source_limit = f.at("energy_aware_source_limit").boolean();
  }

  const auto prof = root.at("profiles");
  prof.only({"step_minutes", "load_csv", "pv_csv"});
  s.profiles.step_minutes = prof.at("step_minutes").integer();
  if (s.profiles.step_minutes <= 0) throw ValidationError("/profiles/step_minutes", "must be positive");
  const auto base = path.parent_path();
  int load_start = 0, pv_start = 0;
  s.profiles.load_kw = read_profile_csv(base / prof.at("load_csv").text(), s.profiles.step_minutes, load_start);
  s.profiles.pv_kw = read_profile_csv(base / prof.at("pv_csv").text(), s.profiles.step_minutes, pv_start);
  if (load_start != pv_start) throw ValidationError("/profiles", "load and PV tables start at different minutes");
  s.profiles.start_minute = load_start;

  validate_scenario(s);
  return s;
}

std::string scenario_json(const Scenario& s, const std::string& load_csv, const std::string& pv_csv) {
  return to_json(s, load_csv, pv_csv).dump(2) + "\n";
}

std::string profile_csv(const ZoneProfiles& p, bool pv) {
  const auto& table = pv ? p.pv_kw : p.load_kw;
  std::string out = "minute";
  for (const auto& [zone, series] : table) out += fmt::format(",{}", zone);
  out += '\n';
  for (std::size_t i = 0; i < p.length(); ++i) {
    out += fmt::format("{}", p.start_minute + static_cast<int>(i) * p.step_minutes);
    for (const auto& [zone, series] : table) out += fmt::format(",{}", series[i]);
    out += '\n';
  }
  return out;
}

void save_scenario(const Scenario& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << body;
  };
  write("scenario.json", scenario_json(s));
  write("load.csv", profile_csv(s.profiles, false));
  write("pv.csv", profile_csv(s.profiles, true));
}

std::uint64_t scenario_fingerprint(const Scenario& s) {
  Scenario unseeded = s;
  unseeded.seed = 0;
  const std::string text = scenario_json(unseeded) + profile_csv(s.profiles, false) + profile_csv(s.profiles, true);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace gridsplit
