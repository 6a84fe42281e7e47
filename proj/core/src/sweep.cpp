#include "hwbench/sweep.hpp"

#include "hwbench/errors.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace hwbench {

namespace {

constexpr double kStepTolerance = 1e-9;

struct Leg {
  double from;
  double to;
  Direction dir;
  Branch branch;
};

}  // namespace

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::Descending1: return "descending-1";
    case Branch::Ascending: return "ascending";
    case Branch::Descending2: return "descending-2";
    case Branch::Ascending1: return "ascending-1";
    case Branch::Descending: return "descending";
    case Branch::Ascending2: return "ascending-2";
  }
  return "unknown";
}

std::string_view to_string(ScanMode m) { return m == ScanMode::DUD ? "DUD" : "UDU"; }

Branch branch_from_string(std::string_view s) {
  for (auto b : {Branch::Descending1, Branch::Ascending, Branch::Descending2, Branch::Ascending1,
                 Branch::Descending, Branch::Ascending2}) {
    if (to_string(b) == s) return b;
  }
  throw std::invalid_argument("unknown branch '" + std::string(s) + "'");
}

ScanMode scan_mode_from_string(std::string_view s) {
  if (s == "DUD" || s == "dud") return ScanMode::DUD;
  if (s == "UDU" || s == "udu") return ScanMode::UDU;
  throw std::invalid_argument("unknown scan mode '" + std::string(s) + "' (expected DUD or UDU)");
}

double snap_voltage(double v) noexcept { return std::round(v * 1e9) / 1e9; }

std::vector<double> generate_sweep(double from_v, double to_v, double v_step, Direction dir) {
  if (!(v_step > 0.0) || !std::isfinite(v_step)) {
    throw PlanError("sweep step must be positive");
  }
  const double span = dir == Direction::Down ? from_v - to_v : to_v - from_v;
  if (span < -kStepTolerance) {
    throw PlanError("sweep direction disagrees with its bounds");
  }
  const double steps = std::max(span, 0.0) / v_step;
  const double n = std::round(steps);
  if (std::abs(steps - n) * v_step > kStepTolerance) {
    throw PlanError("sweep span is not a whole number of steps");
  }
  const double sign = dir == Direction::Down ? -1.0 : 1.0;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (long long i = 0; i <= static_cast<long long>(n); ++i) {
    out.push_back(snap_voltage(from_v + sign * static_cast<double>(i) * v_step));
  }
  out.back() = snap_voltage(to_v);
  return out;
}

void ScanPlan::validate() const {
  if (!(v_step > 0.0)) throw PlanError("v_step must be positive");
  if (!(v_min < v_max)) throw PlanError("v_min must be below v_max");
  if (v_start < v_min || v_start > v_max) throw PlanError("v_start must lie in [v_min, v_max]");
  if (v_end < v_min || v_end > v_max) throw PlanError("v_end must lie in [v_min, v_max]");
  (void)plan_voltages(*this);
}

std::vector<PlannedVoltage> plan_voltages(const ScanPlan& plan) {
  std::array<Leg, 3> legs{};
  if (plan.mode == ScanMode::DUD) {
    legs = {Leg{plan.v_start, plan.v_min, Direction::Down, Branch::Descending1},
            Leg{plan.v_min, plan.v_max, Direction::Up, Branch::Ascending},
            Leg{plan.v_max, plan.v_end, Direction::Down, Branch::Descending2}};
  } else {
    legs = {Leg{plan.v_start, plan.v_max, Direction::Up, Branch::Ascending1},
            Leg{plan.v_max, plan.v_min, Direction::Down, Branch::Descending},
            Leg{plan.v_min, plan.v_end, Direction::Up, Branch::Ascending2}};
  }
  std::vector<PlannedVoltage> out;
  for (std::size_t leg = 0; leg < legs.size(); ++leg) {
    const auto sweep = generate_sweep(legs[leg].from, legs[leg].to, plan.v_step, legs[leg].dir);
    for (std::size_t i = (leg == 0 ? 0 : 1); i < sweep.size(); ++i) {
      out.push_back({sweep[i], legs[leg].branch});
    }
  }
  return out;
}

}  // namespace hwbench
