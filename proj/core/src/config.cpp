#include "hwbench/config.hpp"

#include "hwbench/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace hwbench {

using nlohmann::json;

namespace {

class Section {
 public:
  Section(const json& parent, const std::string& key, std::string path)
      : path_(std::move(path)) {
    if (parent.contains(key)) {
      node_ = &parent.at(key);
      if (!node_->is_object()) throw ConfigError(path_, "expected an object");
    }
  }
  explicit Section(const json& root) : node_(&root) {
    if (!root.is_object()) throw ConfigError("config", "expected an object at the top level");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) const { return node_ && node_->contains(key); }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    seen_.insert(key);
    const auto& v = node_->at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    return v.get<double>();
  }

  int integer(const std::string& key, int def) {
    if (!has(key)) return def;
    seen_.insert(key);
    const auto& v = node_->at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected an integer");
    const double d = v.get<double>();
    if (d != std::floor(d) || std::abs(d) > std::numeric_limits<int>::max()) {
      throw ConfigError(field(key), "expected an integer");
    }
    return static_cast<int>(d);
  }

  std::string string(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    seen_.insert(key);
    const auto& v = node_->at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }

  const json* raw(const std::string& key) {
    if (!has(key)) return nullptr;
    seen_.insert(key);
    return &node_->at(key);
  }

  void skip(const std::string& key) { seen_.insert(key); }

  void require(bool ok, const std::string& key, const std::string& message) const {
    if (!ok) throw ConfigError(field(key), message);
  }

  void finish() const {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
    }
  }

 private:
  const json* node_ = nullptr;
  std::string path_;
  std::set<std::string> seen_;
};

void read_geometry(const json& root, CellGeometry& g) {
  Section s(root, "geometry", "geometry");
  g.contact_radius_m = s.number("contact_radius_m", g.contact_radius_m);
  g.reversible_electrode_radius_m =
      s.number("reversible_electrode_radius_m", g.reversible_electrode_radius_m);
  g.electrolyte_thickness_m = s.number("electrolyte_thickness_m", g.electrolyte_thickness_m);
  s.finish();
  s.require(g.contact_radius_m > 0.0, "contact_radius_m", "must be positive");
  s.require(g.reversible_electrode_radius_m > 0.0, "reversible_electrode_radius_m",
            "must be positive");
  s.require(g.electrolyte_thickness_m > 0.0, "electrolyte_thickness_m", "must be positive");
  s.require(g.contact_radius_m <= g.electrolyte_thickness_m / 10.0, "contact_radius_m",
            "must not exceed electrolyte_thickness_m / 10");
}

void read_reference(const json& root, ReferenceAtmosphere& r) {
  Section s(root, "reference", "reference");
  r.a_o2_reversible = s.number("a_o2_reversible", r.a_o2_reversible);
  r.temperature_k = s.number("temperature_k", r.temperature_k);
  s.finish();
  s.require(r.a_o2_reversible > 0.0, "a_o2_reversible", "must be positive");
  s.require(r.temperature_k > 0.0, "temperature_k", "must be positive");
}

void read_cell(const json& root, GroundTruthCell& c, double a2) {
  Section s(root, "cell", "cell");
  c.sigma_n_ref = s.number("sigma_n_ref", c.sigma_n_ref);
  c.sigma_p_ref = s.number("sigma_p_ref", c.sigma_p_ref);
  c.slope_n = s.number("slope_n", c.slope_n);
  c.slope_p = s.number("slope_p", c.slope_p);
  c.a_ref = s.number("a_ref", a2);
  c.tau_relax_s = s.number("tau_relax_s", c.tau_relax_s);
  c.gaussian_noise_a = s.number("gaussian_noise_a", c.gaussian_noise_a);
  s.finish();
  s.require(c.sigma_n_ref > 0.0, "sigma_n_ref", "must be positive");
  s.require(c.sigma_p_ref > 0.0, "sigma_p_ref", "must be positive");
  s.require(c.slope_n < 0.0, "slope_n", "must be negative");
  s.require(c.slope_p > 0.0, "slope_p", "must be positive");
  s.require(c.a_ref > 0.0, "a_ref", "must be positive");
  s.require(c.tau_relax_s > 0.0, "tau_relax_s", "must be positive");
  s.require(c.gaussian_noise_a >= 0.0, "gaussian_noise_a", "must be non-negative");
}

void read_heater(const json& root, PlantConfig& plant) {
  Section s(root, "heater", "heater");
  auto& h = plant.heater;
  const std::string preset = s.string("preset", "fixed");
  if (preset == "legacy") {
    h = HeaterModel::legacy();
  } else if (preset == "fixed") {
    h = HeaterModel::fixed();
  } else {
    throw ConfigError(s.field("preset"), "expected \"legacy\" or \"fixed\"");
  }
  h.cycle_time_s = s.number("cycle_time_s", h.cycle_time_s);
  h.duty_fraction = s.number("duty_fraction", h.duty_fraction);
  const std::string source = s.string("duty_source", "controller");
  if (source == "controller") {
    h.duty_source = DutySource::Controller;
  } else if (source == "pinned") {
    h.duty_source = DutySource::Pinned;
  } else {
    throw ConfigError(s.field("duty_source"), "expected \"controller\" or \"pinned\"");
  }
  h.disturbance_amp_a = s.number("disturbance_amp_a", h.disturbance_amp_a);
  h.disturbance_sign = s.integer("disturbance_sign", h.disturbance_sign);
  h.oven_tau_s = s.number("oven_tau_s", h.oven_tau_s);
  h.cell_tau_s = s.number("cell_tau_s", h.cell_tau_s);
  h.gain_c_per_unit_power = s.number("gain_c_per_unit_power", h.gain_c_per_unit_power);
  h.ambient_c = s.number("ambient_c", h.ambient_c);
  h.couple_offset_c = s.number("couple_offset_c", h.couple_offset_c);
  h.proportional_band_c = s.number("proportional_band_c", h.proportional_band_c);
  plant.initial_oven_c = s.number("initial_oven_c", plant.initial_oven_c);
  plant.initial_cell_c = s.number("initial_cell_c", plant.initial_cell_c);
  s.finish();
  s.require(h.cycle_time_s > 0.0, "cycle_time_s", "must be positive");
  s.require(h.duty_fraction >= 0.0 && h.duty_fraction <= 1.0, "duty_fraction",
            "must lie in [0, 1]");
  s.require(h.disturbance_amp_a >= 0.0, "disturbance_amp_a", "must be non-negative");
  s.require(h.disturbance_sign == 1 || h.disturbance_sign == -1, "disturbance_sign",
            "must be +1 or -1");
  s.require(h.oven_tau_s > 0.0, "oven_tau_s", "must be positive");
  s.require(h.cell_tau_s > 0.0, "cell_tau_s", "must be positive");
  s.require(h.gain_c_per_unit_power > 0.0, "gain_c_per_unit_power", "must be positive");
  s.require(h.proportional_band_c > 0.0, "proportional_band_c", "must be positive");
}

void read_electrometer(const json& root, ElectrometerModel& e) {
  Section s(root, "electrometer", "electrometer");
  e.sampling_period_s = s.number("sampling_period_s", e.sampling_period_s);
  e.median_rank = s.integer("median_rank", e.median_rank);
  s.finish();
  s.require(e.sampling_period_s > 0.0 && e.sampling_period_s <= 1.0, "sampling_period_s",
            "must lie in (0, 1]");
  const double n = 1.0 / e.sampling_period_s;
  s.require(std::abs(n - std::round(n)) <= 1e-9 * n, "sampling_period_s",
            "1 / sampling_period_s must be an integer");
  s.require(e.median_rank >= 0, "median_rank", "must be non-negative");
}

void read_steady(const json& root, SteadyStateParams& p) {
  Section s(root, "steady_state", "steady_state");
  p.np_s = s.integer("np_s", p.np_s);
  p.nw_s = s.integer("nw_s", p.nw_s);
  if (s.has("s_threshold_a")) p.threshold_a = s.number("s_threshold_a", p.threshold_a);
  p.threshold_a = s.number("threshold_a", p.threshold_a);
  p.nm_s = s.integer("nm_s", p.nm_s);
  p.timeout_s = s.number("timeout_s", p.timeout_s);
  s.finish();
  const auto errors = p.check();
  if (!errors.empty()) throw ConfigError(s.field(errors.front().field), errors.front().message);
}

void read_scan(const json& root, ScanPlan& plan) {
  Section s(root, "scan", "scan");
  plan.v_start = s.number("v_start", plan.v_start);
  plan.v_min = s.number("v_min", plan.v_min);
  plan.v_max = s.number("v_max", plan.v_max);
  plan.v_end = s.number("v_end", plan.v_end);
  plan.v_step = s.number("v_step", plan.v_step);
  const std::string mode = s.string("mode", std::string(to_string(plan.mode)));
  try {
    plan.mode = scan_mode_from_string(mode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.field("mode"), e.what());
  }
  s.finish();
  s.require(plan.v_step > 0.0, "v_step", "must be positive");
  try {
    plan.validate();
  } catch (const PlanError& e) {
    throw ConfigError("scan", e.what());
  }
}

void read_loop(const json& root, TemperatureLoopParams& loop) {
  Section s(root, "temperature_loop", "temperature_loop");
  loop.sp_cell_c = s.number("sp_cell_c", loop.sp_cell_c);
  loop.ki = s.number("ki", loop.ki);
  loop.tol_c = s.number("tol_c", loop.tol_c);
  loop.drift_c = s.number("drift_c", loop.drift_c);
  loop.adjust_period_s = s.number("adjust_period_s", loop.adjust_period_s);
  loop.oven_poll_s = s.number("oven_poll_s", loop.oven_poll_s);
  loop.timeout_s = s.number("timeout_s", loop.timeout_s);
  loop.sp_oven_offset_c = s.number("sp_oven_offset_c", loop.sp_oven_offset_c);
  s.finish();
  try {
    loop.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(s.field(e.field()), std::string(e.what()).substr(e.field().size() + 2));
  }
}

void read_analysis(const json& root, AnalysisOptions& a) {
  Section s(root, "analysis", "analysis");
  a.window_decades = s.number("window_decades", a.window_decades);
  if (const json* ranges = s.raw("ranges_log10")) {
    if (!ranges->is_array()) throw ConfigError(s.field("ranges_log10"), "expected an array");
    a.ranges.clear();
    for (const auto& r : *ranges) {
      if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
        throw ConfigError(s.field("ranges_log10"), "each range must be [lo, hi]");
      }
      const ActivityRange range{r[0].get<double>(), r[1].get<double>()};
      s.require(range.log10_lo < range.log10_hi, "ranges_log10", "each range needs lo < hi");
      a.ranges.push_back(range);
    }
  }
  s.finish();
  s.require(a.window_decades > 0.0, "window_decades", "must be positive");
}

}  // namespace

CampaignConfig config_from_json(const json& j) {
  Section root(j);
  CampaignConfig c;
  auto& setup = c.setup;
  for (const char* key : {"geometry", "reference", "cell", "heater", "electrometer", "steady_state",
                          "scan", "temperature_loop", "analysis"}) {
    root.skip(key);
  }
  read_geometry(j, setup.plant.geometry);
  read_reference(j, setup.plant.reference);
  read_cell(j, setup.plant.cell, setup.plant.reference.a_o2_reversible);
  read_heater(j, setup.plant);
  read_electrometer(j, setup.plant.electrometer);
  read_steady(j, setup.steady);
  read_scan(j, setup.plan);
  read_loop(j, setup.loop);
  read_analysis(j, setup.analysis);
  if (const json* seed = root.raw("seed")) {
    if (!seed->is_number_integer() || (!seed->is_number_unsigned() && seed->get<std::int64_t>() < 0)) {
      throw ConfigError("seed", "expected an unsigned 64-bit integer");
    }
    setup.seed = seed->get<std::uint64_t>();
  }
  c.output_dir = root.string("output_dir", c.output_dir);
  root.require(!c.output_dir.empty(), "output_dir", "must not be empty");
  root.finish();
  return c;
}

json params_to_json(const SteadyStateParams& p) {
  return {{"np_s", p.np_s},
          {"nw_s", p.nw_s},
          {"s_threshold_a", p.threshold_a},
          {"nm_s", p.nm_s},
          {"timeout_s", p.timeout_s}};
}

json config_to_json(const CampaignConfig& c) {
  const auto& s = c.setup;
  const auto& p = s.plant;
  json heater = {{"cycle_time_s", p.heater.cycle_time_s},
                 {"duty_fraction", p.heater.duty_fraction},
                 {"duty_source",
                  p.heater.duty_source == DutySource::Pinned ? "pinned" : "controller"},
                 {"disturbance_amp_a", p.heater.disturbance_amp_a},
                 {"disturbance_sign", p.heater.disturbance_sign},
                 {"oven_tau_s", p.heater.oven_tau_s},
                 {"cell_tau_s", p.heater.cell_tau_s},
                 {"gain_c_per_unit_power", p.heater.gain_c_per_unit_power},
                 {"ambient_c", p.heater.ambient_c},
                 {"couple_offset_c", p.heater.couple_offset_c},
                 {"proportional_band_c", p.heater.proportional_band_c}};
  if (!std::isnan(p.initial_oven_c)) heater["initial_oven_c"] = p.initial_oven_c;
  if (!std::isnan(p.initial_cell_c)) heater["initial_cell_c"] = p.initial_cell_c;

  json ranges = json::array();
  for (const auto& r : s.analysis.ranges) ranges.push_back({r.log10_lo, r.log10_hi});
  json steady = params_to_json(s.steady);
  steady.erase("s_threshold_a");
  steady["threshold_a"] = s.steady.threshold_a;

  return {
      {"geometry",
       {{"contact_radius_m", p.geometry.contact_radius_m},
        {"reversible_electrode_radius_m", p.geometry.reversible_electrode_radius_m},
        {"electrolyte_thickness_m", p.geometry.electrolyte_thickness_m}}},
      {"reference",
       {{"a_o2_reversible", p.reference.a_o2_reversible},
        {"temperature_k", p.reference.temperature_k}}},
      {"cell",
       {{"sigma_n_ref", p.cell.sigma_n_ref},
        {"sigma_p_ref", p.cell.sigma_p_ref},
        {"slope_n", p.cell.slope_n},
        {"slope_p", p.cell.slope_p},
        {"a_ref", p.cell.a_ref},
        {"tau_relax_s", p.cell.tau_relax_s},
        {"gaussian_noise_a", p.cell.gaussian_noise_a}}},
      {"heater", heater},
      {"electrometer",
       {{"sampling_period_s", p.electrometer.sampling_period_s},
        {"median_rank", p.electrometer.median_rank}}},
      {"steady_state", steady},
      {"scan",
       {{"v_start", s.plan.v_start},
        {"v_min", s.plan.v_min},
        {"v_max", s.plan.v_max},
        {"v_end", s.plan.v_end},
        {"v_step", s.plan.v_step},
        {"mode", std::string(to_string(s.plan.mode))}}},
      {"temperature_loop",
       {{"sp_cell_c", s.loop.sp_cell_c},
        {"ki", s.loop.ki},
        {"tol_c", s.loop.tol_c},
        {"drift_c", s.loop.drift_c},
        {"adjust_period_s", s.loop.adjust_period_s},
        {"oven_poll_s", s.loop.oven_poll_s},
        {"timeout_s", s.loop.timeout_s},
        {"sp_oven_offset_c", s.loop.sp_oven_offset_c}}},
      {"analysis", {{"window_decades", s.analysis.window_decades}, {"ranges_log10", ranges}}},
      {"seed", s.seed},
      {"output_dir", c.output_dir},
  };
}

CampaignConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

ParamPatch patch_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("body", "expected an object");
  ParamPatch patch;
  auto integer = [&](const char* key) -> std::optional<int> {
    if (!j.contains(key)) return std::nullopt;
    const auto& v = j.at(key);
    if (!v.is_number() || v.get<double>() != std::floor(v.get<double>())) {
      throw ConfigError(key, "expected an integer");
    }
    return static_cast<int>(v.get<double>());
  };
  auto number = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return std::nullopt;
    if (!j.at(key).is_number()) throw ConfigError(key, "expected a number");
    return j.at(key).get<double>();
  };
  for (const auto& [key, value] : j.items()) {
    if (key != "np_s" && key != "nw_s" && key != "s_threshold_a" && key != "threshold_a" &&
        key != "nm_s" && key != "timeout_s") {
      throw ConfigError(key, "unknown parameter");
    }
  }
  patch.np_s = integer("np_s");
  patch.nw_s = integer("nw_s");
  patch.threshold_a = number("s_threshold_a");
  if (!patch.threshold_a) patch.threshold_a = number("threshold_a");
  patch.nm_s = integer("nm_s");
  patch.timeout_s = number("timeout_s");
  return patch;
}

}  // namespace hwbench
