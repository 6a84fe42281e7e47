#pragma once

#include <cstddef>
#include <deque>
#include <vector>

namespace hwbench {

// Sliding median over the last (2R+1) samples, as done by the electrometer's
// digital filter. Before the window fills, the median is taken over the samples
// available; for an even count the lower of the two central values is used, so
// the output is always one of the recorded readings.
class RunningMedian {
 public:
  explicit RunningMedian(std::size_t rank) : rank_(rank) {}

  std::size_t rank() const noexcept { return rank_; }
  std::size_t capacity() const noexcept { return 2 * rank_ + 1; }
  std::size_t size() const noexcept { return window_.size(); }
  const std::deque<double>& window() const noexcept { return window_; }

  // Pushes a raw sample and returns the median of the updated window.
  double push(double raw);
  double median() const;
  void reset() { window_.clear(); }

 private:
  std::size_t rank_;
  std::deque<double> window_;
  mutable std::vector<double> scratch_;
};

}  // namespace hwbench
