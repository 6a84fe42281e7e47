#include "hwbench/output.hpp"

#include "hwbench/csv.hpp"
#include "hwbench/errors.hpp"
#include "hwbench/number_format.hpp"

#include <cstdio>

namespace hwbench {

namespace fs = std::filesystem;

namespace {

std::ofstream open_or_throw(const fs::path& path) {
  std::ofstream os(path, std::ios::out | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

}  // namespace

OutputWriter::OutputWriter(fs::path dir, const CampaignConfig& config) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  {
    auto os = open_or_throw(dir_ / "config.json");
    os << config_to_json(config).dump(2) << '\n';
  }
  events_ = open_or_throw(dir_ / "events.log");
  iv_ = open_or_throw(dir_ / "iv.csv");
  iv_ << kIvHeader << '\n' << std::flush;
}

IVCurve OutputWriter::iv_rows() const {
  std::lock_guard lock(mutex_);
  return rows_;
}

void OutputWriter::log(double t_s, const std::string& line) {
  char stamp[48];
  std::snprintf(stamp, sizeof stamp, "t=%.3f ", t_s);
  events_ << stamp << line << '\n' << std::flush;
}

void OutputWriter::on_phase(double t_s, CampaignPhase phase) {
  log(t_s, "phase " + std::string(to_string(phase)));
}

void OutputWriter::on_warning(double t_s, const std::string& message) {
  log(t_s, "warning " + message);
}

void OutputWriter::on_setpoint(double t_s, double sp_oven_c, double t_cell_c) {
  log(t_s, "setpoint sp_oven_c=" + format_sci(sp_oven_c) + " t_cell_c=" + format_sci(t_cell_c));
}

void OutputWriter::on_voltage(double t_s, int index, double e_app_v, Branch branch) {
  if (trace_.is_open()) trace_.close();
  trace_name_ = trace_file_name(index, e_app_v);
  trace_ = open_or_throw(dir_ / trace_name_);
  trace_ << kTraceHeader << '\n';
  log(t_s, "voltage index=" + std::to_string(index) + " e_app_v=" + format_sci(e_app_v) +
               " branch=" + std::string(to_string(branch)) + " trace=" + trace_name_);
}

void OutputWriter::on_sample(int, const CurrentSample& sample) {
  trace_ << trace_row(sample) << '\n';
}

void OutputWriter::on_detection(double t_s, int index, double t_rel_s, double delta_a) {
  log(t_s, "detection index=" + std::to_string(index) + " t_rel_s=" + format_sci(t_rel_s) +
               " delta_a=" + format_sci(delta_a));
}

void OutputWriter::on_params_applied(double t_s, const SteadyStateParams& p) {
  log(t_s, "params applied np_s=" + std::to_string(p.np_s) + " nw_s=" + std::to_string(p.nw_s) +
               " s_threshold_a=" + format_sci(p.threshold_a) + " nm_s=" + std::to_string(p.nm_s) +
               " timeout_s=" + format_sci(p.timeout_s));
}

void OutputWriter::on_point(double t_s, const IVPoint& point) {
  if (trace_.is_open()) trace_.close();
  {
    std::lock_guard lock(mutex_);
    iv_ << iv_row(point) << '\n' << std::flush;
    rows_.push_back(point);
  }
  log(t_s, "persisted iv.csv row index=" + std::to_string(point.index) +
               " e_app_v=" + format_sci(point.e_app_v) + " i_ss_a=" + format_sci(point.i_ss_a) +
               (point.timed_out ? " flags=timeout" : ""));
}

void OutputWriter::on_analysis(double t_s, const AnalysisReport& report) {
  write_analysis_files(dir_, report);
  log(t_s, "analysis conductivity_points=" + std::to_string(report.points.size()) +
               " slopes=" + std::to_string(report.slopes.size()));
}

void OutputWriter::on_finish(double t_s, CampaignPhase phase, const std::string& error) {
  if (trace_.is_open()) trace_.close();
  log(t_s, "finish phase=" + std::string(to_string(phase)) + (error.empty() ? "" : " error=" + error));
}

void write_analysis_files(const fs::path& dir, const AnalysisReport& report) {
  fs::create_directories(dir);
  {
    auto os = open_or_throw(dir / "conductivity.csv");
    write_conductivity_csv(os, report.points);
  }
  auto os = open_or_throw(dir / "slopes.csv");
  write_slopes_csv(os, report.slopes);
}

}  // namespace hwbench
