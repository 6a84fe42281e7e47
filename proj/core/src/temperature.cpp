#include "hwbench/temperature.hpp"

#include "hwbench/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hwbench {

void TemperatureLoopParams::validate() const {
  if (!(drift_c > 0.0)) throw ConfigError("drift_c", "must be positive");
  if (!(tol_c > drift_c)) throw ConfigError("tol_c", "must exceed drift_c");
  if (!(ki >= 0.0)) throw ConfigError("ki", "must be non-negative");
  if (!(sp_cell_c >= kSetpointMin && sp_cell_c <= kSetpointMax)) {
    throw ConfigError("sp_cell_c", "must lie in [0, 1000] degC");
  }
  if (!(adjust_period_s > 0.0)) throw ConfigError("adjust_period_s", "must be positive");
  if (!(oven_poll_s > 0.0)) throw ConfigError("oven_poll_s", "must be positive");
  if (!(timeout_s > 0.0)) throw ConfigError("timeout_s", "must be positive");
}

double pi_regulate_step(double sp_oven_c, double sp_cell_c, double t_cell_c, double ki) {
  const double sp = sp_oven_c + ki * (sp_cell_c - t_cell_c);
  return std::clamp(sp, TemperatureLoopParams::kSetpointMin, TemperatureLoopParams::kSetpointMax);
}

namespace {

class Waiter {
 public:
  Waiter(CellSimulator& plant, const StabilizationHooks& hooks, double start_s, double timeout_s)
      : plant_(plant), hooks_(hooks), start_s_(start_s), timeout_s_(timeout_s) {}

  // Returns false when an abort was requested.
  bool wait(double seconds) {
    const auto n = static_cast<long long>(std::llround(seconds * plant_.ticks_per_second()));
    for (long long i = 0; i < n; ++i) {
      const auto sample = plant_.tick();
      if (hooks_.on_tick) hooks_.on_tick(sample);
      if (hooks_.abort_requested && hooks_.abort_requested()) return false;
    }
    return true;
  }

  void check_timeout(const char* phase) const {
    const double elapsed = elapsed_s();
    if (elapsed > timeout_s_) {
      throw TimeoutError(std::string("temperature stabilization timed out during ") + phase,
                         elapsed);
    }
  }

  double elapsed_s() const { return plant_.now_s() - start_s_; }

 private:
  CellSimulator& plant_;
  const StabilizationHooks& hooks_;
  double start_s_;
  double timeout_s_;
};

}  // namespace

StabilizationResult stabilize_temperatures(const TemperatureLoopParams& loop, CellSimulator& plant,
                                           const StabilizationHooks& hooks) {
  StabilizationResult result;
  Waiter waiter(plant, hooks, plant.now_s(), loop.timeout_s);

  double sp_oven = std::clamp(loop.sp_cell_c + loop.sp_oven_offset_c,
                              TemperatureLoopParams::kSetpointMin,
                              TemperatureLoopParams::kSetpointMax);
  plant.set_oven_setpoint(sp_oven);
  if (hooks.on_setpoint) hooks.on_setpoint(plant.now_s(), sp_oven, plant.thermal().cell_c);

  auto finish = [&](bool aborted) {
    result.sp_oven_c = sp_oven;
    result.oven_c = plant.thermal().oven_c;
    result.cell_c = plant.thermal().cell_c;
    result.elapsed_s = waiter.elapsed_s();
    result.aborted = aborted;
    return result;
  };

  // Oven: read, wait a poll period, test the reading.
  for (;;) {
    const double t_oven = plant.thermal().oven_c;
    if (!waiter.wait(loop.oven_poll_s)) return finish(true);
    if (std::abs(t_oven - sp_oven) <= loop.tol_c) break;
    waiter.check_timeout("oven stabilization");
  }
  if (hooks.on_cell_phase) hooks.on_cell_phase(plant.now_s());

  // Cell: correct the oven setpoint, wait, compare against the reading before the wait.
  for (;;) {
    const double t_cell_before = plant.thermal().cell_c;
    sp_oven = pi_regulate_step(sp_oven, loop.sp_cell_c, t_cell_before, loop.ki);
    plant.set_oven_setpoint(sp_oven);
    ++result.adjustments;
    if (hooks.on_setpoint) hooks.on_setpoint(plant.now_s(), sp_oven, t_cell_before);
    if (!waiter.wait(loop.adjust_period_s)) return finish(true);
    const double t_cell = plant.thermal().cell_c;
    result.last_drift_c = std::abs(t_cell - t_cell_before);
    if (std::abs(t_cell - loop.sp_cell_c) <= loop.tol_c && result.last_drift_c < loop.drift_c) {
      break;
    }
    waiter.check_timeout("cell regulation");
  }
  return finish(false);
}

}  // namespace hwbench
