#pragma once

/**
 * The automated measurement campaign.
 *
 * A campaign stabilizes the oven and the cell, then walks the chained voltage
 * sweeps. At each voltage the filtered current is read once per virtual
 * second, the steady-state test runs every Np seconds, and the steady current
 * is the mean of the Nm readings that follow detection. Points are handed to
 * the observers as soon as they exist; analysis runs at the end.
 *
 * Threading: run() executes on one thread. update_live_params(),
 * request_abort() and the snapshot accessors may be called from any thread;
 * parameter patches take effect at the next Np-boundary check, aborts at the
 * next sample.
 */

#include "hwbench/analysis.hpp"
#include "hwbench/cell_sim.hpp"
#include "hwbench/iv_curve.hpp"
#include "hwbench/steady_state.hpp"
#include "hwbench/sweep.hpp"
#include "hwbench/temperature.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace hwbench {

enum class CampaignPhase { Idle, OvenStabilizing, CellStabilizing, Scanning, Analyzing, Done, Aborted };

std::string_view to_string(CampaignPhase phase);

struct FilterCondition {
  bool satisfied;
  double margin_s;  // (2R+1) Ts / 2 - T_on
};

/// T_on < (2R+1) Ts / 2: heater pulses shorter than half the median window are rejected.
FilterCondition check_filter_condition(double t_on_s, const ElectrometerModel& electrometer);

struct CampaignSetup {
  PlantConfig plant;
  SteadyStateParams steady;
  ScanPlan plan;
  TemperatureLoopParams loop;
  AnalysisOptions analysis;
  std::uint64_t seed = 1;

  void validate() const;
};

struct CampaignState {
  CampaignPhase phase = CampaignPhase::Idle;
  SteadyStateParams live_params;
  std::optional<SteadyStateParams> pending_params;
  double current_voltage = 0.0;
  int current_index = -1;
  int points_done = 0;
  int points_planned = 0;
  double sp_oven_c = 0.0;
  double oven_c = 0.0;
  double cell_c = 0.0;
  double t_virtual_s = 0.0;
  std::string error;
};

// One 1 Hz acquisition reading, tagged with the voltage it belongs to.
struct Reading {
  int index;
  double e_app_v;
  Branch branch;
  double t_virtual_s;
  CurrentSample sample;
};

class CampaignObserver {
 public:
  virtual ~CampaignObserver() = default;
  virtual void on_phase(double /*t_s*/, CampaignPhase /*phase*/) {}
  virtual void on_warning(double /*t_s*/, const std::string& /*message*/) {}
  virtual void on_setpoint(double /*t_s*/, double /*sp_oven_c*/, double /*t_cell_c*/) {}
  virtual void on_voltage(double /*t_s*/, int /*index*/, double /*e_app_v*/, Branch /*branch*/) {}
  // Every electrometer sample while a voltage is applied.
  virtual void on_sample(int /*index*/, const CurrentSample& /*sample*/) {}
  virtual void on_reading(const Reading& /*reading*/) {}
  virtual void on_detection(double /*t_s*/, int /*index*/, double /*t_rel_s*/, double /*delta_a*/) {}
  virtual void on_params_applied(double /*t_s*/, const SteadyStateParams& /*params*/) {}
  virtual void on_point(double /*t_s*/, const IVPoint& /*point*/) {}
  virtual void on_analysis(double /*t_s*/, const AnalysisReport& /*report*/) {}
  virtual void on_finish(double /*t_s*/, CampaignPhase /*phase*/, const std::string& /*error*/) {}
};

struct PatchResult {
  bool accepted = false;
  std::vector<FieldError> errors;
  SteadyStateParams queued;  // live params once every pending patch is applied
};

struct CampaignResult {
  IVCurve curve;
  std::optional<AnalysisReport> report;
  StabilizationResult stabilization;
  CampaignPhase final_phase = CampaignPhase::Idle;
  std::string error;
};

class Campaign {
 public:
  explicit Campaign(CampaignSetup setup);

  Campaign(const Campaign&) = delete;
  Campaign& operator=(const Campaign&) = delete;

  // Observers are notified in registration order; register before run().
  void add_observer(CampaignObserver* observer) { observers_.push_back(observer); }
  // Called after each 1 Hz reading of the scanning phase (real-time pacing).
  void set_pacer(std::function<void()> pacer) { pacer_ = std::move(pacer); }

  CampaignResult run();

  PatchResult update_live_params(const ParamPatch& patch);
  void request_abort() noexcept { abort_.store(true); }

  CampaignState snapshot() const;
  IVCurve curve_snapshot() const;
  std::vector<Reading> current_readings() const;
  const CampaignSetup& setup() const noexcept { return setup_; }

 private:
  struct Aborted {};

  void set_phase(CampaignPhase phase);
  void apply_pending_params();
  void check_abort() const;
  IVPoint measure_voltage(int index, const PlannedVoltage& planned);
  double now() const { return plant_.now_s(); }

  template <typename F>
  void notify(F&& f) {
    for (auto* o : observers_) f(*o);
  }

  CampaignSetup setup_;
  CellSimulator plant_;
  std::vector<CampaignObserver*> observers_;
  std::function<void()> pacer_;
  std::atomic<bool> abort_{false};

  SteadyStateParams params_;  // only touched by the run() thread

  mutable std::mutex mutex_;
  CampaignState state_;
  std::vector<ParamPatch> pending_;
  IVCurve curve_;
  std::vector<Reading> readings_;
};

}  // namespace hwbench
