#include "hwbench/median_filter.hpp"

#include <algorithm>
#include <stdexcept>

namespace hwbench {

double RunningMedian::push(double raw) {
  window_.push_back(raw);
  if (window_.size() > capacity()) {
    window_.pop_front();
  }
  return median();
}

double RunningMedian::median() const {
  if (window_.empty()) {
    throw std::logic_error("RunningMedian::median on an empty window");
  }
  scratch_.assign(window_.begin(), window_.end());
  const auto mid = scratch_.begin() + static_cast<std::ptrdiff_t>((scratch_.size() - 1) / 2);
  std::nth_element(scratch_.begin(), mid, scratch_.end());
  return *mid;
}

}  // namespace hwbench
