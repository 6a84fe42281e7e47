#pragma once

#include "hwbench/sweep.hpp"

#include <vector>

namespace hwbench {

// One steady-state point of the Hebb-Wagner curve.
struct IVPoint {
  int index = 0;
  double e_app_v = 0.0;
  double i_ss_a = 0.0;
  Branch branch = Branch::Descending1;
  double t_settled_s = 0.0;
  // No steady state within the timeout; i_ss_a then holds the last window mean
  // and the point is left out of the analysis.
  bool timed_out = false;

  friend bool operator==(const IVPoint&, const IVPoint&) = default;
};

using IVCurve = std::vector<IVPoint>;

}  // namespace hwbench
