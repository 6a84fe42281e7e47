// hwbench: headless campaigns, offline analysis and the steering service.
//
//   hwbench simulate --config configs/ysz-700C.json --out out/run1
//   hwbench analyze  --iv out/run1/iv.csv --out out/reanalysis
//   hwbench replay   out/run1 --out out/replayed
//   hwbench serve    --config configs/ysz-700C.json --listen 127.0.0.1:8080
//
// Exit status: 0 success, 1 configuration error, 2 runtime error.

#include "hwbench/errors.hpp"
#include "hwbench/service.hpp"
#include "hwbench/workbench.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace hwbench;

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

CampaignConfig load_or_default(const std::string& path) {
  return path.empty() ? CampaignConfig{} : load_config(path);
}

ActivityRange parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("--range", "expected lo:hi, got '" + text + "'");
  try {
    ActivityRange r{std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
    if (!(r.log10_lo < r.log10_hi)) throw ConfigError("--range", "lo must be below hi");
    return r;
  } catch (const std::logic_error&) {
    throw ConfigError("--range", "expected numbers in '" + text + "'");
  }
}

std::pair<std::string, int> parse_listen(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw ConfigError("--listen", "expected addr:port");
  try {
    const int port = std::stoi(text.substr(colon + 1));
    if (port < 0 || port > 65535) throw ConfigError("--listen", "port out of range");
    return {text.substr(0, colon), port};
  } catch (const std::logic_error&) {
    throw ConfigError("--listen", "bad port in '" + text + "'");
  }
}

void print_report(const AnalysisReport& report) {
  for (const auto& s : report.slopes) {
    std::printf("slope %-12s log10(a) in [%.2f, %.2f]: %+.4f (%d points)\n",
                std::string(to_string(s.branch)).c_str(), s.fit.range.log10_lo,
                s.fit.range.log10_hi, s.fit.slope, s.fit.n_points);
  }
}

struct SimulateArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string mode;
};

int run_simulate(const SimulateArgs& args) {
  CampaignConfig config = load_or_default(args.config);
  if (!args.out.empty()) config.output_dir = args.out;
  if (args.seed) config.setup.seed = *args.seed;
  if (!args.mode.empty()) {
    try {
      config.setup.plan.mode = scan_mode_from_string(args.mode);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("--mode", e.what());
    }
  }
  config.setup.validate();

  const CampaignResult result = simulate(config);
  std::printf("%s: %zu points in %s\n", std::string(to_string(result.final_phase)).c_str(),
              result.curve.size(), config.output_dir.c_str());
  if (result.report) print_report(*result.report);
  if (result.final_phase != CampaignPhase::Done) {
    std::fprintf(stderr, "hwbench: campaign aborted: %s\n", result.error.c_str());
    return kExitRuntime;
  }
  return 0;
}

struct AnalyzeArgs {
  std::string iv;
  std::string config;
  std::string out = ".";
  std::optional<double> radius_m;
  std::optional<double> temperature_k;
  std::optional<double> a2;
  std::vector<std::string> ranges;
  std::optional<double> window_decades;
};

int run_analyze(const AnalyzeArgs& args) {
  CampaignConfig config = load_or_default(args.config);
  auto& plant = config.setup.plant;
  if (args.radius_m) plant.geometry.contact_radius_m = *args.radius_m;
  if (args.temperature_k) plant.reference.temperature_k = *args.temperature_k;
  if (args.a2) plant.reference.a_o2_reversible = *args.a2;
  AnalysisOptions options = config.setup.analysis;
  if (!args.ranges.empty()) {
    options.ranges.clear();
    for (const auto& r : args.ranges) options.ranges.push_back(parse_range(r));
  }
  if (args.window_decades) options.window_decades = *args.window_decades;
  try {
    plant.geometry.validate();
    plant.reference.validate();
  } catch (const DomainError& e) {
    throw ConfigError("geometry/reference", e.what());
  }

  const AnalysisReport report =
      analyze_iv_file(args.iv, plant.geometry, plant.reference, options, args.out, plant.constants);
  std::printf("%zu conductivity points written to %s\n", report.points.size(), args.out.c_str());
  print_report(report);
  return 0;
}

int run_replay(const std::string& run_dir, const std::string& out) {
  const AnalysisReport report = replay(run_dir, out.empty() ? run_dir : out);
  std::printf("%zu conductivity points\n", report.points.size());
  print_report(report);
  return 0;
}

struct ServeArgs {
  std::string config;
  std::string listen = "127.0.0.1:8080";
  double time_ratio = 0.05;
  std::string ui = "ui";
  std::string out;
};

int run_serve(const ServeArgs& args) {
  ServiceOptions options;
  options.base_config = load_or_default(args.config);
  if (!args.out.empty()) options.base_config.output_dir = args.out;
  options.base_config.setup.validate();
  options.time_ratio = args.time_ratio;
  options.ui_dir = args.ui;
  const auto [host, port] = parse_listen(args.listen);

  // Handle termination synchronously on this thread; worker threads inherit the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(options);
  const int bound = service.start(host, port);
  std::printf("listening on http://%s:%d\n", host.c_str(), bound);
  std::fflush(stdout);
  int received = 0;
  sigwait(&signals, &received);
  service.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hebb-Wagner electronic conductivity workbench"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a headless campaign on the virtual clock");
  simulate_cmd->add_option("--config", sim.config, "Campaign config (JSON)")->check(CLI::ExistingFile);
  simulate_cmd->add_option("--out", sim.out, "Output directory (overrides output_dir)");
  simulate_cmd->add_option("--seed", sim.seed, "RNG seed (overrides seed)");
  simulate_cmd->add_option("--mode", sim.mode, "Scan order")->check(CLI::IsMember({"dud", "udu", "DUD", "UDU"}));

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Conductivity and slopes from an iv.csv");
  analyze_cmd->add_option("--iv", an.iv, "iv.csv to analyze")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--config", an.config, "Take geometry, atmosphere and fit windows from a config")
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--out", an.out, "Directory for conductivity.csv and slopes.csv");
  analyze_cmd->add_option("--radius", an.radius_m, "Contact radius a [m]");
  analyze_cmd->add_option("--temperature-k", an.temperature_k, "Cell temperature [K]");
  analyze_cmd->add_option("--a2", an.a2, "Oxygen activity at the reversible electrode");
  analyze_cmd->add_option("--range", an.ranges, "Fit window in log10(a) as lo:hi (repeatable)");
  analyze_cmd->add_option("--window-decades", an.window_decades, "Width of the default fit windows");

  std::string replay_dir;
  std::string replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "Recompute the analysis of a stored output directory");
  replay_cmd->add_option("run_dir", replay_dir, "Output directory of a previous run")
      ->required()
      ->check(CLI::ExistingDirectory);
  replay_cmd->add_option("--out", replay_out, "Where to write (defaults to run_dir)");

  ServeArgs srv;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP + event-stream steering service");
  serve_cmd->add_option("--config", srv.config, "Base campaign config (JSON)")->check(CLI::ExistingFile);
  serve_cmd->add_option("--listen", srv.listen, "addr:port")->capture_default_str();
  serve_cmd->add_option("--time-ratio", srv.time_ratio, "Real seconds per virtual second")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  serve_cmd->add_option("--ui", srv.ui, "Static dashboard directory mounted at /")->capture_default_str();
  serve_cmd->add_option("--out", srv.out, "Output directory (overrides output_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*simulate_cmd) return run_simulate(sim);
    if (*analyze_cmd) return run_analyze(an);
    if (*replay_cmd) return run_replay(replay_dir, replay_out);
    if (*serve_cmd) return run_serve(srv);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "hwbench: config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hwbench: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
