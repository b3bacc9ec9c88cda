#include <algorithm>
#include <cmath>
#include <numbers>

#include "gridsplit/scenario.hpp"

namespace gridsplit {

namespace {

constexpr int kStep = 5;
constexpr int kDays = 2;
constexpr int kPerDay = 24 * 60 / kStep;

// Share of each zone in its feeder's load and PV.
constexpr double kShare[10] = {0.15, 0.20, 0.25, 0.20, 0.20, 0.20, 0.15, 0.25, 0.20, 0.20};
constexpr double kPeakKw[2][kDays] = {{3500.0, 3000.0}, {3000.0, 2000.0}};  // [feeder][day]
constexpr double kPvNameplateKw = 4000.0;

// Morning and evening peaks over a night base; normalized so the sampled
// daily maximum is exactly 1.
std::vector<double> load_shape() {
  std::vector<double> v(kPerDay);
  for (int i = 0; i < kPerDay; ++i) {
    const double h = i * kStep / 60.0;
    v[i] = 0.5 + 0.3 * std::exp(-std::pow((h - 9.0) / 2.5, 2)) + 0.5 * std::exp(-std::pow((h - 19.5) / 2.5, 2));
  }
  const double peak = *std::max_element(v.begin(), v.end());
  for (double& x : v) x /= peak;
  return v;
}

// Zero outside 06:00-18:00, peak 1 at noon.
std::vector<double> pv_shape() {
  std::vector<double> v(kPerDay, 0.0);
  for (int i = 0; i < kPerDay; ++i) {
    const double h = i * kStep / 60.0;
    if (h > 6.0 && h < 18.0) v[i] = std::pow(std::sin(std::numbers::pi * (h - 6.0) / 12.0), 2);
  }
  return v;
}

}  // namespace

std::vector<LateralPolicy> fixture_policies(bool force_zero_right) {
  std::vector<LateralPolicy> p{{1, 2, 2, false}, {7, 6, 2, false}};
  if (force_zero_right) {
    p.push_back({1, 1, 0, true});
    p.push_back({7, 5, 0, true});
  }
  return p;
}

Scenario fixture_two_feeder() {
  Scenario s;
  s.name = "two_feeder";
  s.seed = 1;

  const std::set<int> critical{2, 3, 4, 7, 9, 10};
  std::vector<ZoneNode> nodes;
  for (int id = 1; id <= 10; ++id) {
    const int feeder = id <= 5 ? 1 : 2;
    const double share = kShare[id - 1];
    nodes.push_back({id, feeder, critical.contains(id), share * kPeakKw[feeder - 1][0], share * kPvNameplateKw,
                     id == 1 || id == 7});
  }

  constexpr double limit = 8000.0;
  std::vector<SwitchEdge> edges{
      {1, 1, 2, false, limit}, {2, 1, 3, false, limit}, {3, 3, 4, false, limit}, {4, 4, 5, false, limit},
      {5, 6, 7, false, limit}, {6, 7, 8, false, limit}, {7, 8, 9, false, limit}, {8, 9, 10, false, limit},
      {9, 5, 6, true, limit},  {10, 2, 10, true, limit},
  };

  GridFormingResource r1{1, 3000.0, 12000.0, 1.0, 0.95, 4000.0, 20000.0};
  GridFormingResource r2{7, 2000.0, 8000.0, 1.0, 0.95, 4000.0, 20000.0};
  s.graph = ZoneGraph(std::move(nodes), std::move(edges), {r1, r2}, {}, fixture_policies());

  const auto load = load_shape();
  const auto pv = pv_shape();
  s.profiles.start_minute = 0;
  s.profiles.step_minutes = kStep;
  for (int id = 1; id <= 10; ++id) {
    const int feeder = id <= 5 ? 0 : 1;
    auto& l = s.profiles.load_kw[id];
    auto& p = s.profiles.pv_kw[id];
    for (int d = 0; d < kDays; ++d) {
      for (int i = 0; i < kPerDay; ++i) {
        l.push_back(kShare[id - 1] * kPeakKw[feeder][d] * load[i]);
        p.push_back(kShare[id - 1] * kPvNameplateKw * pv[i]);
      }
    }
  }
  return s;
}

}  // namespace gridsplit
