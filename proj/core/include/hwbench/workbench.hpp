#pragma once

#include "hwbench/campaign.hpp"
#include "hwbench/config.hpp"
#include "hwbench/output.hpp"

#include <filesystem>
#include <vector>

namespace hwbench {

/// Runs a headless campaign on the virtual clock, writing into config.output_dir.
CampaignResult simulate(const CampaignConfig& config,
                        const std::vector<CampaignObserver*>& extra_observers = {});

/// Offline analysis of an iv.csv; writes conductivity.csv and slopes.csv into out_dir.
/// Throws ParseError for malformed input and InsufficientDataError when no branch
/// has two usable points.
AnalysisReport analyze_iv_file(const std::filesystem::path& iv_path, const CellGeometry& geom,
                               const ReferenceAtmosphere& ref, const AnalysisOptions& options,
                               const std::filesystem::path& out_dir,
                               const PhysicalConstants& consts = kConstants);

/// Recomputes the analysis of a stored output directory from its config.json and iv.csv.
AnalysisReport replay(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir);

}  // namespace hwbench
