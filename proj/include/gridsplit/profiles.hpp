#pragma once

// Per-zone load and PV time series on a uniform grid.

#include <map>
#include <vector>

namespace gridsplit {

struct ZoneProfiles {
  int start_minute = 0;
  int step_minutes = 5;
  std::map<int, std::vector<double>> load_kw;  // zone id -> series
  std::map<int, std::vector<double>> pv_kw;

  std::size_t length() const;
  int end_minute() const { return start_minute + static_cast<int>(length()) * step_minutes; }

  // Sub-window [from, to) in minutes, averaged (or maxed) into `step` buckets.
  // `to` is clipped to the end of the series. Throws std::invalid_argument when
  // the window is not aligned with the grid.
  ZoneProfiles window(int from, int to, int step, bool use_max = false) const;
};

}  // namespace gridsplit
