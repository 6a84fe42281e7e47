#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hwbench {

enum class ScanMode { DUD, UDU };
enum class Direction { Down, Up };

// Legs of a scan. DUD visits Descending1, Ascending, Descending2; UDU mirrors it.
enum class Branch { Descending1, Ascending, Descending2, Ascending1, Descending, Ascending2 };

std::string_view to_string(Branch b);
std::string_view to_string(ScanMode m);
Branch branch_from_string(std::string_view s);  // throws std::invalid_argument
ScanMode scan_mode_from_string(std::string_view s);

struct ScanPlan {
  double v_start = 0.0;
  double v_min = -0.6;
  double v_max = 0.6;
  double v_end = 0.0;
  double v_step = 0.01;
  ScanMode mode = ScanMode::DUD;

  void validate() const;  // throws PlanError
};

struct PlannedVoltage {
  double e_app_v;
  Branch branch;
};

// Voltages are snapped to a 1 nV grid so that k * step lands on round values.
double snap_voltage(double v) noexcept;

/// Arithmetic sequence from `from_v` to `to_v` inclusive. Throws PlanError when
/// the direction disagrees with the bounds or the span is not a whole number of steps.
std::vector<double> generate_sweep(double from_v, double to_v, double v_step, Direction dir);

/// The three chained legs of the plan; shared endpoints are visited once and
/// belong to the leg that reaches them first.
std::vector<PlannedVoltage> plan_voltages(const ScanPlan& plan);

}  // namespace hwbench
