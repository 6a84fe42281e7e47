#include "hwbench/workbench.hpp"

#include "hwbench/csv.hpp"
#include "hwbench/errors.hpp"

#include <fstream>

namespace hwbench {

namespace fs = std::filesystem;

CampaignResult simulate(const CampaignConfig& config,
                        const std::vector<CampaignObserver*>& extra_observers) {
  Campaign campaign(config.setup);
  OutputWriter writer(config.output_dir, config);
  campaign.add_observer(&writer);
  for (auto* o : extra_observers) campaign.add_observer(o);
  return campaign.run();
}

AnalysisReport analyze_iv_file(const fs::path& iv_path, const CellGeometry& geom,
                               const ReferenceAtmosphere& ref, const AnalysisOptions& options,
                               const fs::path& out_dir, const PhysicalConstants& consts) {
  std::ifstream in(iv_path);
  if (!in) throw std::runtime_error("cannot open " + iv_path.string());
  const IVCurve curve = parse_iv_csv(in);
  geom.validate();
  ref.validate();
  AnalysisReport report = analyze_curve(curve, geom, ref, consts, options);
  if (report.points.empty()) {
    throw InsufficientDataError("no branch of " + iv_path.string() +
                                " has two usable points with positive conductivity");
  }
  write_analysis_files(out_dir, report);
  return report;
}

AnalysisReport replay(const fs::path& run_dir, const fs::path& out_dir) {
  const CampaignConfig config = load_config(run_dir / "config.json");
  const auto& plant = config.setup.plant;
  return analyze_iv_file(run_dir / "iv.csv", plant.geometry, plant.reference,
                         config.setup.analysis, out_dir, plant.constants);
}

}  // namespace hwbench
