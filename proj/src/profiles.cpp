#include "gridsplit/profiles.hpp"

#include <algorithm>
#include <stdexcept>

namespace gridsplit {

std::size_t ZoneProfiles::length() const {
  if (load_kw.empty()) return 0;
  return load_kw.begin()->second.size();
}

namespace {

std::vector<double> rebucket(const std::vector<double>& series, int first, int last, int ratio, bool use_max) {
  std::vector<double> out;
  for (int i = first; i < last; i += ratio) {
    const int stop = std::min(i + ratio, last);
    double acc = use_max ? series[i] : 0.0;
    for (int j = i; j < stop; ++j) acc = use_max ? std::max(acc, series[j]) : acc + series[j];
    out.push_back(use_max ? acc : acc / (stop - i));
  }
  return out;
}

}  // namespace

ZoneProfiles ZoneProfiles::window(int from, int to, int step, bool use_max) const {
  if (step <= 0 || step % step_minutes != 0) throw std::invalid_argument("window step must be a multiple of the grid");
  if (from < start_minute || (from - start_minute) % step_minutes != 0)
    throw std::invalid_argument("window start is off the grid");
  to = std::min(to, end_minute());
  ZoneProfiles out;
  out.start_minute = from;
  out.step_minutes = step;
  const int first = (from - start_minute) / step_minutes;
  const int last = std::max(first, (to - start_minute) / step_minutes);
  const int ratio = step / step_minutes;
  for (const auto& [zone, s] : load_kw) out.load_kw[zone] = rebucket(s, first, last, ratio, use_max);
  for (const auto& [zone, s] : pv_kw) out.pv_kw[zone] = rebucket(s, first, last, ratio, use_max);
  return out;
}

}  // namespace gridsplit
