#pragma once

/**
 * Discrete-time stand-in for the oven, the cell and the electrometer.
 *
 * The simulator advances in ticks of the electrometer sampling period Ts.
 * Each tick integrates the first-order oven/cell thermal plant, evaluates the
 * relaxing cell current, adds the PWM heater disturbance and seeded Gaussian
 * sensor noise, and pushes the raw reading through the running median.
 */

#include "hwbench/electrochem.hpp"
#include "hwbench/median_filter.hpp"

#include <cstdint>
#include <random>

namespace hwbench {

// Hidden sigma_e(a_O2) = sigma_n_ref (a/a_ref)^slope_n + sigma_p_ref (a/a_ref)^slope_p.
struct GroundTruthCell {
  double sigma_n_ref = 1e-4;
  double sigma_p_ref = 1e-4;
  double slope_n = -1.0 / 6.0;
  double slope_p = 1.0 / 6.0;
  double a_ref = 0.21;
  double tau_relax_s = 60.0;
  double gaussian_noise_a = 0.2e-9;

  void validate() const;
  double conductivity(double a_o2) const;
};

enum class DutySource {
  Controller,  // recomputed from the oven error each PWM cycle
  Pinned,      // held at duty_fraction (noise-rejection experiments)
};

struct HeaterModel {
  double cycle_time_s = 2.0;
  double duty_fraction = 0.0;
  DutySource duty_source = DutySource::Controller;
  double disturbance_amp_a = 100e-9;
  int disturbance_sign = 1;
  double oven_tau_s = 600.0;
  double cell_tau_s = 180.0;
  double gain_c_per_unit_power = 2250.0;
  double ambient_c = 25.0;
  double couple_offset_c = 8.0;
  double proportional_band_c = 50.0;

  double on_time_s() const noexcept { return duty_fraction * cycle_time_s; }
  void validate() const;

  // T_tc = 10 s controller that produced the periodic spikes.
  static HeaterModel legacy();
  // T_tc = 2 s controller matched to the 2.2 s median window.
  static HeaterModel fixed();
};

struct ElectrometerModel {
  double sampling_period_s = 0.2;
  int median_rank = 5;

  double window_s() const noexcept { return (2.0 * median_rank + 1.0) * sampling_period_s; }
  // Number of ticks per virtual second; 1/Ts must be an integer.
  int ticks_per_second() const;
  void validate() const;
};

struct CurrentSample {
  double t_s = 0.0;  // since voltage application
  double raw_a = 0.0;
  double filtered_a = 0.0;
  double cell_temp_c = 0.0;
  bool heater_on = false;

  friend bool operator==(const CurrentSample&, const CurrentSample&) = default;
};

/// Steady-state (purely electronic) current at applied voltage E:
/// I_ss(E) = 2 pi a * integral_0^E sigma_e(a1(E')) dE', evaluated in closed form.
double steady_current(double e_app_v, const GroundTruthCell& cell, const ReferenceAtmosphere& ref,
                      const CellGeometry& geom, const PhysicalConstants& consts = kConstants);

/// Single-exponential approach from I_ss(e_prev) to I_ss(e_new).
double transient_current(double t_s, double e_prev_v, double e_new_v, const GroundTruthCell& cell,
                         const ReferenceAtmosphere& ref, const CellGeometry& geom,
                         const PhysicalConstants& consts = kConstants);

/// Exponential relaxation between two arbitrary current levels.
double relax_current(double t_s, double i_start_a, double i_target_a, double tau_s);

/// Additive current offset while the PWM output is on: (t mod T_tc) < T_on.
double heater_disturbance(double t_abs_s, const HeaterModel& heater);
bool heater_is_on(double t_abs_s, const HeaterModel& heater);

struct ThermalState {
  double oven_c = 25.0;
  double cell_c = 25.0;
  double duty = 0.0;
};

/// Duty the temperature controller commands for a given oven setpoint:
/// a bias holding the setpoint at equilibrium plus a proportional correction.
double controller_duty(const HeaterModel& heater, double sp_oven_c, double t_oven_c);

/// One explicit Euler step of the oven/cell plant. The duty is recomputed
/// only when `new_cycle` is set (start of a PWM period).
ThermalState thermal_step(const ThermalState& state, const HeaterModel& heater, double sp_oven_c,
                          double dt_s, bool new_cycle);

struct PlantConfig {
  CellGeometry geometry;
  ReferenceAtmosphere reference;
  GroundTruthCell cell;
  HeaterModel heater;
  ElectrometerModel electrometer;
  PhysicalConstants constants;
  double initial_oven_c;  // NaN selects ambient
  double initial_cell_c;

  PlantConfig();
  void validate() const;
};

// The virtual bench. Single writer: all methods must be called from one thread.
class CellSimulator {
 public:
  CellSimulator(const PlantConfig& config, std::uint64_t seed);

  // Advances one sampling period and returns the electrometer reading.
  CurrentSample tick();

  void apply_voltage(double e_app_v);
  double applied_voltage() const noexcept { return e_applied_; }

  void set_oven_setpoint(double sp_c) noexcept { sp_oven_c_ = sp_c; }
  double oven_setpoint() const noexcept { return sp_oven_c_; }
  const ThermalState& thermal() const noexcept { return thermal_; }
  const HeaterModel& heater() const noexcept { return heater_; }
  const PlantConfig& config() const noexcept { return config_; }

  std::uint64_t ticks() const noexcept { return tick_; }
  int ticks_per_second() const noexcept { return ticks_per_second_; }
  double now_s() const noexcept { return static_cast<double>(tick_) / ticks_per_second_; }
  double since_apply_s() const noexcept {
    return static_cast<double>(tick_ - apply_tick_) / ticks_per_second_;
  }
  // Noise-free cell current at the current instant.
  double cell_current() const;

 private:
  PlantConfig config_;
  HeaterModel heater_;
  ThermalState thermal_;
  RunningMedian median_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> unit_normal_{0.0, 1.0};
  int ticks_per_second_;
  std::uint64_t tick_ = 0;
  std::uint64_t apply_tick_ = 0;
  long long cycle_index_ = 0;
  double sp_oven_c_;
  double e_applied_ = 0.0;
  double i_start_ = 0.0;
  double i_target_ = 0.0;
};

}  // namespace hwbench
