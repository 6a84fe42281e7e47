#include "hwbench/cell_sim.hpp"

#include "hwbench/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hwbench {

void GroundTruthCell::validate() const {
  if (!(sigma_n_ref > 0.0) || !(sigma_p_ref > 0.0)) {
    throw DomainError("sigma_n_ref and sigma_p_ref must be positive");
  }
  if (!(slope_n < 0.0) || !(slope_p > 0.0)) {
    throw DomainError("slopes must satisfy slope_n < 0 < slope_p");
  }
  if (!(a_ref > 0.0)) {
    throw DomainError("a_ref must be positive");
  }
  if (!(tau_relax_s > 0.0)) {
    throw DomainError("tau_relax_s must be positive");
  }
  if (!(gaussian_noise_a >= 0.0)) {
    throw DomainError("gaussian_noise_a must be non-negative");
  }
}

double GroundTruthCell::conductivity(double a_o2) const {
  const double r = a_o2 / a_ref;
  return sigma_n_ref * std::pow(r, slope_n) + sigma_p_ref * std::pow(r, slope_p);
}

void HeaterModel::validate() const {
  if (!(cycle_time_s > 0.0)) throw DomainError("cycle_time_s must be positive");
  if (!(duty_fraction >= 0.0 && duty_fraction <= 1.0)) {
    throw DomainError("duty_fraction must lie in [0, 1]");
  }
  if (!(oven_tau_s > 0.0) || !(cell_tau_s > 0.0)) {
    throw DomainError("thermal time constants must be positive");
  }
  if (disturbance_sign != 1 && disturbance_sign != -1) {
    throw DomainError("disturbance_sign must be +1 or -1");
  }
  if (!(disturbance_amp_a >= 0.0)) throw DomainError("disturbance_amp_a must be non-negative");
  if (!(gain_c_per_unit_power > 0.0)) throw DomainError("gain_c_per_unit_power must be positive");
  if (!(proportional_band_c > 0.0)) throw DomainError("proportional_band_c must be positive");
}

HeaterModel HeaterModel::legacy() {
  HeaterModel h;
  h.cycle_time_s = 10.0;
  return h;
}

HeaterModel HeaterModel::fixed() {
  HeaterModel h;
  h.cycle_time_s = 2.0;
  return h;
}

int ElectrometerModel::ticks_per_second() const {
  return static_cast<int>(std::lround(1.0 / sampling_period_s));
}

void ElectrometerModel::validate() const {
  if (!(sampling_period_s > 0.0) || sampling_period_s > 1.0) {
    throw DomainError("sampling_period_s must lie in (0, 1]");
  }
  const double n = 1.0 / sampling_period_s;
  if (std::abs(n - std::round(n)) > 1e-9 * n) {
    throw DomainError("1 / sampling_period_s must be an integer (1 Hz reads fall on samples)");
  }
  if (median_rank < 0) throw DomainError("median_rank must be non-negative");
}

namespace {

// 2 pi a * sigma_ref (a2/a_ref)^m * (exp(kE) - 1) / k with k = z m F / (R T).
double power_law_term(double e_app_v, double sigma_ref, double slope, double a_ratio, double zf_rt,
                      double two_pi_a) {
  const double k = slope * zf_rt;
  return two_pi_a * sigma_ref * std::pow(a_ratio, slope) * std::expm1(k * e_app_v) / k;
}

}  // namespace

double steady_current(double e_app_v, const GroundTruthCell& cell, const ReferenceAtmosphere& ref,
                      const CellGeometry& geom, const PhysicalConstants& consts) {
  // Range policy of the activity mapping applies at E.
  (void)nernst_log10_activity(e_app_v, ref, consts);
  const double zf_rt =
      consts.z_electrons * consts.faraday / (consts.gas_constant * ref.temperature_k);
  const double a_ratio = ref.a_o2_reversible / cell.a_ref;
  const double two_pi_a = 2.0 * std::numbers::pi * geom.contact_radius_m;
  const double i = power_law_term(e_app_v, cell.sigma_n_ref, cell.slope_n, a_ratio, zf_rt, two_pi_a) +
                   power_law_term(e_app_v, cell.sigma_p_ref, cell.slope_p, a_ratio, zf_rt, two_pi_a);
  if (!std::isfinite(i)) {
    throw RangeError("steady_current: non-finite current");
  }
  return i;
}

double relax_current(double t_s, double i_start_a, double i_target_a, double tau_s) {
  return i_target_a + (i_start_a - i_target_a) * std::exp(-t_s / tau_s);
}

double transient_current(double t_s, double e_prev_v, double e_new_v, const GroundTruthCell& cell,
                         const ReferenceAtmosphere& ref, const CellGeometry& geom,
                         const PhysicalConstants& consts) {
  return relax_current(t_s, steady_current(e_prev_v, cell, ref, geom, consts),
                       steady_current(e_new_v, cell, ref, geom, consts), cell.tau_relax_s);
}

bool heater_is_on(double t_abs_s, const HeaterModel& heater) {
  if (heater.duty_fraction <= 0.0) return false;
  // Sample instants are k * Ts in floating point; phases within a nanosecond
  // of an edge are snapped to it so the on-interval stays [0, T_on).
  constexpr double kEdge = 1e-9;
  double phase = std::fmod(t_abs_s, heater.cycle_time_s);
  if (heater.cycle_time_s - phase < kEdge) phase = 0.0;
  return phase < heater.on_time_s() - kEdge;
}

double heater_disturbance(double t_abs_s, const HeaterModel& heater) {
  return heater_is_on(t_abs_s, heater) ? heater.disturbance_sign * heater.disturbance_amp_a : 0.0;
}

double controller_duty(const HeaterModel& heater, double sp_oven_c, double t_oven_c) {
  const double bias = (sp_oven_c - heater.ambient_c) / heater.gain_c_per_unit_power;
  return std::clamp(bias + (sp_oven_c - t_oven_c) / heater.proportional_band_c, 0.0, 1.0);
}

ThermalState thermal_step(const ThermalState& state, const HeaterModel& heater, double sp_oven_c,
                          double dt_s, bool new_cycle) {
  ThermalState next = state;
  if (heater.duty_source == DutySource::Pinned) {
    next.duty = heater.duty_fraction;
  } else if (new_cycle) {
    next.duty = controller_duty(heater, sp_oven_c, state.oven_c);
  }
  const double oven_target = heater.ambient_c + heater.gain_c_per_unit_power * next.duty;
  next.oven_c = state.oven_c + dt_s * (oven_target - state.oven_c) / heater.oven_tau_s;
  next.cell_c =
      state.cell_c + dt_s * (state.oven_c - heater.couple_offset_c - state.cell_c) / heater.cell_tau_s;
  return next;
}

PlantConfig::PlantConfig()
    : initial_oven_c(std::numeric_limits<double>::quiet_NaN()),
      initial_cell_c(std::numeric_limits<double>::quiet_NaN()) {}

void PlantConfig::validate() const {
  geometry.validate();
  reference.validate();
  cell.validate();
  heater.validate();
  electrometer.validate();
}

CellSimulator::CellSimulator(const PlantConfig& config, std::uint64_t seed)
    : config_(config),
      heater_(config.heater),
      median_(static_cast<std::size_t>(config.electrometer.median_rank)),
      rng_(seed),
      ticks_per_second_(0),
      sp_oven_c_(config.heater.ambient_c) {
  config_.validate();
  ticks_per_second_ = config_.electrometer.ticks_per_second();
  thermal_.oven_c = std::isnan(config_.initial_oven_c) ? heater_.ambient_c : config_.initial_oven_c;
  thermal_.cell_c = std::isnan(config_.initial_cell_c) ? heater_.ambient_c : config_.initial_cell_c;
  // Until told otherwise the controller holds the oven where it is.
  sp_oven_c_ = thermal_.oven_c;
  if (heater_.duty_source == DutySource::Pinned) {
    thermal_.duty = heater_.duty_fraction;
  } else {
    thermal_.duty = controller_duty(heater_, sp_oven_c_, thermal_.oven_c);
    heater_.duty_fraction = thermal_.duty;
  }
}

double CellSimulator::cell_current() const {
  return relax_current(since_apply_s(), i_start_, i_target_, config_.cell.tau_relax_s);
}

void CellSimulator::apply_voltage(double e_app_v) {
  // The new transient starts from the current actually flowing, which equals
  // I_ss(previous voltage) once the previous step has settled.
  const double i_now = cell_current();
  i_target_ = steady_current(e_app_v, config_.cell, config_.reference, config_.geometry,
                             config_.constants);
  i_start_ = i_now;
  e_applied_ = e_app_v;
  apply_tick_ = tick_;
}

CurrentSample CellSimulator::tick() {
  ++tick_;
  const double t = now_s();
  const auto cycle = static_cast<long long>(std::floor(t / heater_.cycle_time_s + 1e-12));
  const bool new_cycle = cycle != cycle_index_;
  cycle_index_ = cycle;

  thermal_ = thermal_step(thermal_, heater_, sp_oven_c_, config_.electrometer.sampling_period_s,
                          new_cycle);
  heater_.duty_fraction = thermal_.duty;

  CurrentSample s;
  s.t_s = since_apply_s();
  s.heater_on = heater_is_on(t, heater_);
  const double noise = unit_normal_(rng_) * config_.cell.gaussian_noise_a;
  s.raw_a = cell_current() + heater_disturbance(t, heater_) + noise;
  s.filtered_a = median_.push(s.raw_a);
  s.cell_temp_c = thermal_.cell_c;
  return s;
}

}  // namespace hwbench
