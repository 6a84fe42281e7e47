#pragma once

#include "hwbench/cell_sim.hpp"

#include <functional>

namespace hwbench {

struct TemperatureLoopParams {
  double sp_cell_c = 700.0;
  double ki = 0.5;
  double tol_c = 0.8;
  double drift_c = 0.15;
  double adjust_period_s = 300.0;
  double oven_poll_s = 60.0;
  double timeout_s = 24.0 * 3600.0;
  double sp_oven_offset_c = 0.0;  // initial SP_oven = SP_cell + offset

  static constexpr double kSetpointMin = 0.0;
  static constexpr double kSetpointMax = 1000.0;

  void validate() const;  // throws ConfigError
};

/// One integral correction of the oven setpoint, clamped to [0, 1000] degC.
double pi_regulate_step(double sp_oven_c, double sp_cell_c, double t_cell_c, double ki);

struct StabilizationResult {
  double sp_oven_c = 0.0;
  double oven_c = 0.0;
  double cell_c = 0.0;
  double last_drift_c = 0.0;
  double elapsed_s = 0.0;
  int adjustments = 0;
  bool aborted = false;
};

struct StabilizationHooks {
  std::function<bool()> abort_requested;
  std::function<void(const CurrentSample&)> on_tick;
  // Called once oven stabilization is done and cell regulation starts.
  std::function<void(double t_s)> on_cell_phase;
  std::function<void(double t_s, double sp_oven_c, double t_cell_c)> on_setpoint;
};

/// Oven wait followed by the PI regulation of the cell temperature.
/// Phase 1 polls T_oven every oven_poll_s until |T_oven - SP_oven| <= tol.
/// Phase 2 applies pi_regulate_step every adjust_period_s until
/// |T_cell - SP_cell| <= tol and the change since the previous check is below drift.
/// Throws TimeoutError past loop.timeout_s of virtual time.
StabilizationResult stabilize_temperatures(const TemperatureLoopParams& loop, CellSimulator& plant,
                                           const StabilizationHooks& hooks = {});

}  // namespace hwbench
