#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gridsplit/errors.hpp"
#include "gridsplit/scenario.hpp"

using namespace gridsplit;
namespace fs = std::filesystem;

namespace {

class ScenarioFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gridsplit_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    save_scenario(fixture_two_feeder(), dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }
  void replace_in(const std::string& name, const std::string& from, const std::string& to) const {
    auto text = read(name);
    const auto at = text.find(from);
    ASSERT_NE(at, std::string::npos) << from;
    write(name, text.replace(at, from.size(), to));
  }
  fs::path json() const { return dir_ / "scenario.json"; }

  fs::path dir_;
};

std::string failure_path(const fs::path& p) {
  try {
    load_scenario(p);
  } catch (const ValidationError& e) {
    return e.path();
  }
  return "<none>";
}

// Largest feeder-wide sum of a series over [from, to) minutes.
double feeder_peak(const Scenario& s, const std::map<int, std::vector<double>>& table, int feeder, int from, int to) {
  double peak = 0.0;
  for (int m = from; m < to; m += s.profiles.step_minutes) {
    double sum = 0.0;
    for (const auto& n : s.graph.nodes())
      if (n.feeder_id == feeder) sum += table.at(n.id)[m / s.profiles.step_minutes];
    peak = std::max(peak, sum);
  }
  return peak;
}

}  // namespace

TEST(Fixture, MatchesPublishedSystem) {
  const auto s = fixture_two_feeder();
  std::set<int> critical;
  for (const auto& n : s.graph.nodes())
    if (n.is_critical) critical.insert(n.id);
  EXPECT_EQ(critical, (std::set<int>{2, 3, 4, 7, 9, 10}));

  std::set<std::pair<int, int>> ties;
  for (const auto& e : s.graph.edges())
    if (e.normally_open) ties.insert(std::minmax(e.from, e.to));
  EXPECT_EQ(ties, (std::set<std::pair<int, int>>{{5, 6}, {2, 10}}));

  const auto& r1 = s.graph.resource_at(1);
  const auto& r2 = s.graph.resource_at(7);
  EXPECT_EQ(r1.battery_power_kw, 3000.0);
  EXPECT_EQ(r1.battery_energy_kwh, 12000.0);
  EXPECT_EQ(r2.battery_power_kw, 2000.0);
  EXPECT_EQ(r2.battery_energy_kwh, 8000.0);
  EXPECT_EQ(r1.diesel_power_kw, 4000.0);
  EXPECT_EQ(r2.diesel_power_kw, 4000.0);

  for (int feeder : {1, 2}) {
    double nameplate = 0.0;
    for (const auto& n : s.graph.nodes())
      if (n.feeder_id == feeder) nameplate += n.pv_rating_kw;
    EXPECT_NEAR(nameplate, 4000.0, 1e-9);
  }
  EXPECT_NEAR(feeder_peak(s, s.profiles.load_kw, 1, 0, 1440), 3500.0, 1e-6);
  EXPECT_NEAR(feeder_peak(s, s.profiles.load_kw, 1, 1440, 2880), 3000.0, 1e-6);
  EXPECT_NEAR(feeder_peak(s, s.profiles.load_kw, 2, 0, 1440), 3000.0, 1e-6);
  EXPECT_NEAR(feeder_peak(s, s.profiles.load_kw, 2, 1440, 2880), 2000.0, 1e-6);
  EXPECT_NEAR(feeder_peak(s, s.profiles.pv_kw, 1, 0, 1440), 4000.0, 1.0);
  EXPECT_EQ(s.profiles.length(), 576u);
  EXPECT_NO_THROW(validate_scenario(s));
}

TEST(Fixture, PvOnlyInDaylight) {
  const auto s = fixture_two_feeder();
  for (const auto& [zone, series] : s.profiles.pv_kw)
    for (std::size_t i = 0; i < series.size(); ++i) {
      const int minute_of_day = static_cast<int>(i) * 5 % 1440;
      if (minute_of_day < 6 * 60 || minute_of_day > 18 * 60) {
        EXPECT_EQ(series[i], 0.0);
      }
    }
}

TEST(Timeline, Validation) {
  Timeline t;
  EXPECT_NO_THROW(t.validate());
  EXPECT_EQ(t.formation_events(), 16);
  EXPECT_EQ(t.dispatch_steps(), 576);
  t.dispatch_step = 7;
  EXPECT_THROW(t.validate(), ValidationError);
}

TEST(Scenario, FaultWindows) {
  auto s = fixture_two_feeder();
  s.faults = {{3, 60, 120}, {9, 100, 200}};
  EXPECT_EQ(s.faults_at(59), (std::set<int>{}));
  EXPECT_EQ(s.faults_at(60), (std::set<int>{3}));
  EXPECT_EQ(s.faults_at(110), (std::set<int>{3, 9}));
  EXPECT_EQ(s.faults_at(120), (std::set<int>{9}));
}

TEST(Scenario, FingerprintIgnoresSeedOnly) {
  auto a = fixture_two_feeder();
  auto b = a;
  b.seed = a.seed + 99;
  EXPECT_EQ(scenario_fingerprint(a), scenario_fingerprint(b));
  b.weights.shed_weight *= 2;
  EXPECT_NE(scenario_fingerprint(a), scenario_fingerprint(b));
  b = a;
  b.profiles.load_kw[3][100] += 1e-9;
  EXPECT_NE(scenario_fingerprint(a), scenario_fingerprint(b));
}

TEST_F(ScenarioFiles, RoundTrip) {
  const auto original = fixture_two_feeder();
  const auto loaded = load_scenario(json());
  EXPECT_EQ(scenario_json(loaded), scenario_json(original));
  EXPECT_EQ(loaded.profiles.load_kw, original.profiles.load_kw);
  EXPECT_EQ(loaded.profiles.pv_kw, original.profiles.pv_kw);
  EXPECT_EQ(loaded.graph.lateral_policies(), original.graph.lateral_policies());
  EXPECT_EQ(loaded.timeline, original.timeline);
  EXPECT_EQ(scenario_fingerprint(loaded), scenario_fingerprint(original));
}

TEST_F(ScenarioFiles, FaultedTieLoads) {
  replace_in("scenario.json", "\"faults\": []", "\"faults\": [{\"edge_id\": 9, \"start_min\": 0, \"end_min\": 600}]");
  const auto s = load_scenario(json());
  ASSERT_EQ(s.faults.size(), 1u);
  EXPECT_EQ(s.faults_at(0), (std::set<int>{9}));
}

TEST_F(ScenarioFiles, ShortProfileRejectedWithPath) {
  auto csv = read("load.csv");
  csv.erase(csv.find_last_of('\n', csv.size() - 2) + 1);
  write("load.csv", csv);
  EXPECT_EQ(failure_path(json()), "/profiles/load_csv");
}

TEST_F(ScenarioFiles, UnknownFieldRejected) {
  replace_in("scenario.json", "\"shed_weight\"", "\"shed_wieght\": 1, \"shed_weight\"");
  EXPECT_EQ(failure_path(json()), "/weights/shed_wieght");
}

TEST_F(ScenarioFiles, MissingFieldRejected) {
  auto text = read("scenario.json");
  const auto at = text.find("  \"name\"");
  write("scenario.json", text.erase(at, text.find('\n', at) + 1 - at));
  EXPECT_EQ(failure_path(json()), "/name");
}

TEST_F(ScenarioFiles, BadValuesRejected) {
  replace_in("scenario.json", "\"aggregation\": \"mean\"", "\"aggregation\": \"median\"");
  EXPECT_EQ(failure_path(json()), "/formation/aggregation");
}

TEST_F(ScenarioFiles, SchemaVersionChecked) {
  replace_in("scenario.json", "\"schema_version\": 1", "\"schema_version\": 2");
  EXPECT_EQ(failure_path(json()), "/schema_version");
}

TEST_F(ScenarioFiles, MalformedJsonIsParseError) {
  write("scenario.json", read("scenario.json").substr(0, 100));
  EXPECT_THROW(load_scenario(json()), ParseError);
}

TEST_F(ScenarioFiles, NonNumericCellIsParseError) {
  auto csv = read("pv.csv");
  const auto at = csv.find("\n0,") + 3;
  csv.replace(at, 1, "x");
  write("pv.csv", csv);
  EXPECT_THROW(load_scenario(json()), ParseError);
}

TEST_F(ScenarioFiles, MissingFileIsParseError) {
  EXPECT_THROW(load_scenario(dir_ / "nope.json"), ParseError);
  fs::remove(dir_ / "load.csv");
  EXPECT_THROW(load_scenario(json()), ParseError);
}

TEST_F(ScenarioFiles, StructuralErrorReportsNetwork) {
  // A tie that is not marked normally open breaks the feeder rule.
  replace_in("scenario.json", "\"normally_open\": true", "\"normally_open\": false");
  const auto p = failure_path(json());
  EXPECT_EQ(p.rfind("/network", 0), 0u) << p;
}
