#pragma once

#include "hwbench/campaign.hpp"
#include "hwbench/config.hpp"

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

namespace hwbench {

// Persists a running campaign into its output directory as data become
// available: config.json at construction, one trace file per voltage, iv.csv
// appended and flushed per point, events.log per event, and conductivity.csv
// plus slopes.csv once analysis completes. Register it before any observer
// that notifies clients so that files are durable first.
class OutputWriter : public CampaignObserver {
 public:
  OutputWriter(std::filesystem::path dir, const CampaignConfig& config);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  // Rows currently durable in iv.csv; safe from any thread.
  IVCurve iv_rows() const;

  void on_phase(double t_s, CampaignPhase phase) override;
  void on_warning(double t_s, const std::string& message) override;
  void on_setpoint(double t_s, double sp_oven_c, double t_cell_c) override;
  void on_voltage(double t_s, int index, double e_app_v, Branch branch) override;
  void on_sample(int index, const CurrentSample& sample) override;
  void on_detection(double t_s, int index, double t_rel_s, double delta_a) override;
  void on_params_applied(double t_s, const SteadyStateParams& params) override;
  void on_point(double t_s, const IVPoint& point) override;
  void on_analysis(double t_s, const AnalysisReport& report) override;
  void on_finish(double t_s, CampaignPhase phase, const std::string& error) override;

 private:
  void log(double t_s, const std::string& line);

  std::filesystem::path dir_;
  std::ofstream events_;
  std::ofstream iv_;
  std::ofstream trace_;
  std::string trace_name_;
  mutable std::mutex mutex_;
  IVCurve rows_;
};

void write_analysis_files(const std::filesystem::path& dir, const AnalysisReport& report);

}  // namespace hwbench
