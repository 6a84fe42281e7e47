#include "hwbench/steady_state.hpp"

#include "hwbench/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hwbench {

std::vector<FieldError> SteadyStateParams::check() const {
  std::vector<FieldError> errors;
  if (np_s < 1) errors.push_back({"np_s", "must be >= 1"});
  if (nw_s < 1) errors.push_back({"nw_s", "must be >= 1"});
  if (!(threshold_a > 0.0) || !std::isfinite(threshold_a)) {
    errors.push_back({"threshold_a", "must be a positive current"});
  }
  if (nm_s < 1) errors.push_back({"nm_s", "must be >= 1"});
  if (!(timeout_s > static_cast<double>(np_s) + nw_s)) {
    errors.push_back({"timeout_s", "must exceed np_s + nw_s"});
  }
  return errors;
}

void SteadyStateParams::validate() const {
  const auto errors = check();
  if (!errors.empty()) {
    throw ConfigError(errors.front().field, errors.front().message);
  }
}

SteadyStateParams ParamPatch::applied_to(SteadyStateParams p) const {
  if (np_s) p.np_s = *np_s;
  if (nw_s) p.nw_s = *nw_s;
  if (threshold_a) p.threshold_a = *threshold_a;
  if (nm_s) p.nm_s = *nm_s;
  if (timeout_s) p.timeout_s = *timeout_s;
  return p;
}

int first_check_time(const SteadyStateParams& p) { return std::max(p.np_s, p.nw_s) + p.np_s; }

std::optional<double> window_mean_difference(std::span<const double> readings, int np_s, int nw_s,
                                             int k) {
  if (np_s < 1 || nw_s < 1 || k < np_s + nw_s || static_cast<std::size_t>(k) > readings.size()) {
    return std::nullopt;
  }
  // Reading at time t lives at index t - 1.
  double recent = 0.0;
  double earlier = 0.0;
  for (int j = 0; j < nw_s; ++j) {
    recent += readings[static_cast<std::size_t>(k - 1 - j)];
    earlier += readings[static_cast<std::size_t>(k - np_s - 1 - j)];
  }
  return std::abs(recent / nw_s - earlier / nw_s);
}

SteadyVerdict steady_state_check(std::span<const double> readings, const SteadyStateParams& p,
                                 int k) {
  const auto delta = window_mean_difference(readings, p.np_s, p.nw_s, k);
  if (!delta) return SteadyVerdict::NotReady;
  return *delta <= p.threshold_a ? SteadyVerdict::Steady : SteadyVerdict::NotSteady;
}

SteadyStateDetector::Outcome SteadyStateDetector::check(std::span<const double> readings, int t) {
  const auto delta = window_mean_difference(readings, params_.np_s, params_.nw_s, t);
  Outcome out{SteadyVerdict::NotReady, delta};
  if (delta) {
    out.verdict = *delta <= params_.threshold_a ? SteadyVerdict::Steady : SteadyVerdict::NotSteady;
  }
  if (out.verdict != SteadyVerdict::Steady) next_check_ = t + params_.np_s;
  return out;
}

std::optional<int> first_detection_time(std::span<const double> readings, const SteadyStateParams& p) {
  SteadyStateDetector detector(p);
  for (int t = 1; static_cast<std::size_t>(t) <= readings.size(); ++t) {
    if (detector.due(t) && detector.check(readings, t).verdict == SteadyVerdict::Steady) return t;
  }
  return std::nullopt;
}

double measure_steady_current(std::span<const double> readings, std::size_t first, int nm_s) {
  if (nm_s < 1 || first + static_cast<std::size_t>(nm_s) > readings.size()) {
    throw InsufficientDataError("measure_steady_current: fewer than Nm readings available");
  }
  double sum = 0.0;
  for (int j = 0; j < nm_s; ++j) sum += readings[first + static_cast<std::size_t>(j)];
  return sum / nm_s;
}

}  // namespace hwbench
