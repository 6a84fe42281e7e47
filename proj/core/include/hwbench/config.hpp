#pragma once

#include "hwbench/campaign.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace hwbench {

// Everything a campaign run needs. The JSON form uses the section names
// geometry, reference, cell, heater, electrometer, steady_state, scan,
// temperature_loop, analysis, plus seed and output_dir.
struct CampaignConfig {
  CampaignSetup setup;
  std::string output_dir = "out";
};

/// Throws ConfigError whose field() is the dotted path of the offending key
/// (e.g. "steady_state.nw_s"). Unknown keys are rejected.
CampaignConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const CampaignConfig& config);
CampaignConfig load_config(const std::filesystem::path& path);

nlohmann::json params_to_json(const SteadyStateParams& p);
// Accepts np_s, nw_s, s_threshold_a (or threshold_a), nm_s, timeout_s.
ParamPatch patch_from_json(const nlohmann::json& j);

}  // namespace hwbench
