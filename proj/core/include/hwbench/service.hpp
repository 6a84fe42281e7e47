#pragma once

/**
 * HTTP + server-sent-event front end for steering a live campaign.
 *
 *   POST  /api/campaign         start (body: config JSON merged over the base config)
 *   POST  /api/campaign/abort
 *   GET   /api/campaign         CampaignState snapshot
 *   GET   /api/params           live steady-state parameters (+ pending patch)
 *   PATCH /api/params           queue a patch, applied at the next Np boundary
 *   GET   /api/iv               rows durable in iv.csv
 *   GET   /api/conductivity     analysis of the current I-V prefix
 *   GET   /api/trace/current    1 Hz readings of the voltage being measured
 *   GET   /api/stream           text/event-stream of readings and state changes
 *
 * The service only touches the campaign through Campaign's thread-safe
 * command surface.
 */

#include "hwbench/config.hpp"

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>

namespace hwbench {

struct ServiceOptions {
  CampaignConfig base_config;
  // Real seconds per virtual second during scanning; 0 runs unpaced.
  double time_ratio = 0.05;
  std::filesystem::path ui_dir = "ui";
  // Events buffered per stream subscriber before it is dropped.
  std::size_t subscriber_queue = 4096;
};

class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port; throws std::runtime_error when binding fails.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hwbench
