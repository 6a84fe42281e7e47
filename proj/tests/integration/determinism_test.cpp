#include "hwbench/config.hpp"
#include "hwbench/workbench.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

using namespace hwbench;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[fs::relative(entry.path(), dir).string()] = ss.str();
  }
  return files;
}

// Runs the config twice into the same output_dir (config.json records it) and
// returns both trees.
std::pair<std::map<std::string, std::string>, std::map<std::string, std::string>> run_twice(
    CampaignConfig config, const fs::path& scratch) {
  config.output_dir = (scratch / "run").string();
  REQUIRE(simulate(config).final_phase == CampaignPhase::Done);
  fs::rename(scratch / "run", scratch / "first");
  REQUIRE(simulate(config).final_phase == CampaignPhase::Done);
  return {read_tree(scratch / "first"), read_tree(scratch / "run")};
}

}  // namespace

TEST_CASE("same config and seed give byte-identical output trees") {
  const auto scratch = test::scratch_dir("determinism_stock");
  const auto config = load_config(fs::path(HWBENCH_CONFIG_DIR) / "ysz-700C.json");
  const auto [a, b] = run_twice(config, scratch);
  CHECK(a.size() == 246);
  for (const char* name : {"iv.csv", "conductivity.csv", "slopes.csv", "events.log", "config.json"}) {
    CHECK(a.count(name) == 1);
  }
  REQUIRE(a.size() == b.size());
  for (const auto& [name, content] : a) {
    CAPTURE(name);
    REQUIRE(b.count(name) == 1);
    CHECK(b.at(name) == content);
  }
}

TEST_CASE("determinism holds for UDU and a noisier bench") {
  const auto scratch = test::scratch_dir("determinism_udu");
  CampaignConfig config;
  config.setup.plan = ScanPlan{0.0, -0.3, 0.3, 0.0, 0.05, ScanMode::UDU};
  config.setup.plant.cell.gaussian_noise_a = 2e-9;
  config.setup.seed = 123456789;
  const auto [a, b] = run_twice(config, scratch);
  CHECK(a == b);
}

TEST_CASE("the seed changes the noise and nothing else") {
  const auto scratch = test::scratch_dir("determinism_seed");
  CampaignConfig config;
  config.setup.plan = ScanPlan{0.0, -0.1, 0.1, 0.0, 0.1, ScanMode::DUD};
  config.output_dir = (scratch / "one").string();
  simulate(config);
  config.setup.seed = 2;
  config.output_dir = (scratch / "two").string();
  simulate(config);
  const auto one = read_tree(scratch / "one");
  const auto two = read_tree(scratch / "two");
  REQUIRE(one.size() == two.size());
  CHECK(one.at("trace_000_p0mV.csv") != two.at("trace_000_p0mV.csv"));
}
