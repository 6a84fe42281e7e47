#include "hwbench/campaign.hpp"

#include "hwbench/errors.hpp"
#include "hwbench/number_format.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace hwbench {

std::string_view to_string(CampaignPhase phase) {
  switch (phase) {
    case CampaignPhase::Idle: return "Idle";
    case CampaignPhase::OvenStabilizing: return "OvenStabilizing";
    case CampaignPhase::CellStabilizing: return "CellStabilizing";
    case CampaignPhase::Scanning: return "Scanning";
    case CampaignPhase::Analyzing: return "Analyzing";
    case CampaignPhase::Done: return "Done";
    case CampaignPhase::Aborted: return "Aborted";
  }
  return "Unknown";
}

FilterCondition check_filter_condition(double t_on_s, const ElectrometerModel& electrometer) {
  const double half_window = electrometer.window_s() / 2.0;
  return {t_on_s < half_window, half_window - t_on_s};
}

void CampaignSetup::validate() const {
  plant.validate();
  steady.validate();
  plan.validate();
  loop.validate();
}

Campaign::Campaign(CampaignSetup setup)
    : setup_((setup.validate(), std::move(setup))), plant_(setup_.plant, setup_.seed),
      params_(setup_.steady) {
  state_.live_params = params_;
  state_.oven_c = plant_.thermal().oven_c;
  state_.cell_c = plant_.thermal().cell_c;
  state_.sp_oven_c = plant_.oven_setpoint();
}

void Campaign::set_phase(CampaignPhase phase) {
  {
    std::lock_guard lock(mutex_);
    state_.phase = phase;
    state_.t_virtual_s = now();
  }
  notify([&](CampaignObserver& o) { o.on_phase(now(), phase); });
}

void Campaign::check_abort() const {
  if (abort_.load()) throw Aborted{};
}

PatchResult Campaign::update_live_params(const ParamPatch& patch) {
  std::lock_guard lock(mutex_);
  PatchResult result;
  SteadyStateParams base = state_.pending_params.value_or(state_.live_params);
  if (state_.phase == CampaignPhase::Done || state_.phase == CampaignPhase::Aborted) {
    result.errors.push_back({"campaign", "not running"});
    result.queued = base;
    return result;
  }
  const SteadyStateParams candidate = patch.applied_to(base);
  result.errors = candidate.check();
  if (!result.errors.empty()) {
    result.queued = base;
    return result;
  }
  result.accepted = true;
  result.queued = candidate;
  if (!patch.empty()) {
    pending_.push_back(patch);
    state_.pending_params = candidate;
  }
  return result;
}

void Campaign::apply_pending_params() {
  {
    std::lock_guard lock(mutex_);
    if (pending_.empty()) return;
    for (const auto& p : pending_) params_ = p.applied_to(params_);
    pending_.clear();
    state_.live_params = params_;
    state_.pending_params.reset();
  }
  notify([&](CampaignObserver& o) { o.on_params_applied(now(), params_); });
}

CampaignState Campaign::snapshot() const {
  std::lock_guard lock(mutex_);
  return state_;
}

IVCurve Campaign::curve_snapshot() const {
  std::lock_guard lock(mutex_);
  return curve_;
}

std::vector<Reading> Campaign::current_readings() const {
  std::lock_guard lock(mutex_);
  return readings_;
}

IVPoint Campaign::measure_voltage(int index, const PlannedVoltage& planned) {
  plant_.apply_voltage(planned.e_app_v);
  {
    std::lock_guard lock(mutex_);
    state_.current_voltage = planned.e_app_v;
    state_.current_index = index;
    readings_.clear();
  }
  notify([&](CampaignObserver& o) { o.on_voltage(now(), index, planned.e_app_v, planned.branch); });

  IVPoint point;
  point.index = index;
  point.e_app_v = quantize(planned.e_app_v);
  point.branch = planned.branch;

  std::vector<double> filtered;
  const int tps = plant_.ticks_per_second();
  int t = 0;
  SteadyStateDetector detector(params_);
  std::optional<int> detected_at;
  int nm = params_.nm_s;

  for (;;) {
    CurrentSample last;
    for (int k = 0; k < tps; ++k) {
      last = plant_.tick();
      notify([&](CampaignObserver& o) { o.on_sample(index, last); });
      check_abort();
    }
    ++t;
    filtered.push_back(last.filtered_a);
    const Reading reading{index, planned.e_app_v, planned.branch, now(), last};
    {
      std::lock_guard lock(mutex_);
      readings_.push_back(reading);
      state_.t_virtual_s = now();
      state_.oven_c = plant_.thermal().oven_c;
      state_.cell_c = plant_.thermal().cell_c;
    }
    notify([&](CampaignObserver& o) { o.on_reading(reading); });
    if (pacer_) pacer_();

    if (!detected_at) {
      if (detector.due(t)) {
        apply_pending_params();
        detector.set_params(params_);
        const auto outcome = detector.check(filtered, t);
        if (outcome.verdict == SteadyVerdict::Steady) {
          detected_at = t;
          nm = params_.nm_s;
          notify([&](CampaignObserver& o) { o.on_detection(now(), index, t, *outcome.delta_a); });
        }
      }
      if (!detected_at && t >= params_.timeout_s) {
        const auto n = std::min<std::size_t>(filtered.size(), static_cast<std::size_t>(params_.nw_s));
        point.i_ss_a = quantize(measure_steady_current(filtered, filtered.size() - n, static_cast<int>(n)));
        point.t_settled_s = t;
        point.timed_out = true;
        char msg[160];
        std::snprintf(msg, sizeof msg, "no steady state at index %d (E = %s V) after %d s", index,
                      format_sci(planned.e_app_v).c_str(), t);
        notify([&](CampaignObserver& o) { o.on_warning(now(), msg); });
        return point;
      }
    } else if (t - *detected_at >= nm) {
      point.i_ss_a =
          quantize(measure_steady_current(filtered, static_cast<std::size_t>(*detected_at), nm));
      point.t_settled_s = *detected_at;
      return point;
    }
  }
}

CampaignResult Campaign::run() {
  CampaignResult result;
  const auto tps = static_cast<std::uint64_t>(plant_.ticks_per_second());

  // Heater on-time the controller will settle at, compared with the median window.
  const auto& heater = setup_.plant.heater;
  double duty = heater.duty_fraction;
  if (heater.duty_source == DutySource::Controller) {
    const double sp_eq = setup_.loop.sp_cell_c + heater.couple_offset_c;
    duty = controller_duty(heater, sp_eq, sp_eq);
  }
  const auto filter = check_filter_condition(duty * heater.cycle_time_s, setup_.plant.electrometer);
  if (!filter.satisfied) {
    char msg[200];
    std::snprintf(msg, sizeof msg,
                  "median filter condition violated: T_on = %.3f s, T_WIN/2 = %.3f s (margin %.3f s)",
                  duty * heater.cycle_time_s, setup_.plant.electrometer.window_s() / 2.0,
                  filter.margin_s);
    notify([&](CampaignObserver& o) { o.on_warning(now(), msg); });
  }

  try {
    set_phase(CampaignPhase::OvenStabilizing);
    StabilizationHooks hooks;
    hooks.abort_requested = [this] { return abort_.load(); };
    hooks.on_tick = [this, tps](const CurrentSample&) {
      if (plant_.ticks() % tps != 0) return;
      std::lock_guard lock(mutex_);
      state_.t_virtual_s = now();
      state_.oven_c = plant_.thermal().oven_c;
      state_.cell_c = plant_.thermal().cell_c;
    };
    hooks.on_cell_phase = [this](double) { set_phase(CampaignPhase::CellStabilizing); };
    hooks.on_setpoint = [this](double t, double sp, double t_cell) {
      {
        std::lock_guard lock(mutex_);
        state_.sp_oven_c = sp;
      }
      notify([&](CampaignObserver& o) { o.on_setpoint(t, sp, t_cell); });
    };
    result.stabilization = stabilize_temperatures(setup_.loop, plant_, hooks);
    if (result.stabilization.aborted) throw Aborted{};

    set_phase(CampaignPhase::Scanning);
    const auto planned = plan_voltages(setup_.plan);
    {
      std::lock_guard lock(mutex_);
      state_.points_planned = static_cast<int>(planned.size());
    }
    for (std::size_t i = 0; i < planned.size(); ++i) {
      const IVPoint point = measure_voltage(static_cast<int>(i), planned[i]);
      notify([&](CampaignObserver& o) { o.on_point(now(), point); });
      std::lock_guard lock(mutex_);
      curve_.push_back(point);
      state_.points_done = static_cast<int>(curve_.size());
    }

    set_phase(CampaignPhase::Analyzing);
    const auto& p = setup_.plant;
    result.report = analyze_curve(curve_, p.geometry, p.reference, p.constants, setup_.analysis);
    notify([&](CampaignObserver& o) { o.on_analysis(now(), *result.report); });
    set_phase(CampaignPhase::Done);
  } catch (const Aborted&) {
    set_phase(CampaignPhase::Aborted);
  } catch (const std::exception& e) {
    {
      std::lock_guard lock(mutex_);
      state_.error = e.what();
    }
    result.error = e.what();
    set_phase(CampaignPhase::Aborted);
  }

  result.curve = curve_snapshot();
  result.final_phase = snapshot().phase;
  notify([&](CampaignObserver& o) { o.on_finish(now(), result.final_phase, result.error); });
  return result;
}

}  // namespace hwbench
