#include "hwbench/service.hpp"

#include "hwbench/errors.hpp"
#include "hwbench/output.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <list>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace hwbench {

using nlohmann::json;

namespace {

json to_json(const IVPoint& p) {
  return {{"index", p.index},         {"e_app_v", p.e_app_v},
          {"i_ss_a", p.i_ss_a},       {"branch", to_string(p.branch)},
          {"t_settled_s", p.t_settled_s}, {"timed_out", p.timed_out}};
}

json to_json(const CurrentSample& s) {
  return {{"t_s", s.t_s},
          {"raw_a", s.raw_a},
          {"filtered_a", s.filtered_a},
          {"cell_temp_c", s.cell_temp_c},
          {"heater_on", s.heater_on}};
}

json to_json(const Reading& r) {
  json j = to_json(r.sample);
  j["index"] = r.index;
  j["e_app_v"] = r.e_app_v;
  j["branch"] = to_string(r.branch);
  j["t_virtual_s"] = r.t_virtual_s;
  return j;
}

json to_json(const CampaignState& s) {
  json j = {{"phase", to_string(s.phase)},
            {"params", params_to_json(s.live_params)},
            {"pending_params", nullptr},
            {"current_voltage", s.current_voltage},
            {"current_index", s.current_index},
            {"points_done", s.points_done},
            {"points_planned", s.points_planned},
            {"sp_oven_c", s.sp_oven_c},
            {"oven_c", s.oven_c},
            {"cell_c", s.cell_c},
            {"t_virtual_s", s.t_virtual_s},
            {"error", s.error}};
  if (s.pending_params) j["pending_params"] = params_to_json(*s.pending_params);
  return j;
}

json to_json(const AnalysisReport& r) {
  json points = json::array();
  for (const auto& p : r.points) {
    points.push_back({{"branch", to_string(p.branch)},
                      {"e_mid_v", p.e_mid_v},
                      {"a_o2", p.a_o2},
                      {"log10_a_o2", p.log10_a_o2},
                      {"sigma_s_per_m", p.sigma_e},
                      {"repaired", p.repaired}});
  }
  json slopes = json::array();
  for (const auto& s : r.slopes) {
    slopes.push_back({{"branch", to_string(s.branch)},
                      {"log10_a_lo", s.fit.range.log10_lo},
                      {"log10_a_hi", s.fit.range.log10_hi},
                      {"slope", s.fit.slope},
                      {"intercept", s.fit.intercept},
                      {"n_points", s.fit.n_points},
                      {"rms_residual", s.fit.rms_residual}});
  }
  return {{"points", std::move(points)}, {"slopes", std::move(slopes)}};
}

json errors_json(const std::vector<FieldError>& errors) {
  json arr = json::array();
  for (const auto& e : errors) arr.push_back({{"field", e.field}, {"message", e.message}});
  return {{"errors", std::move(arr)}};
}

json error_json(const std::string& field, const std::string& message) {
  return errors_json({FieldError{field, message}});
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

// Fan-out of SSE frames. Each subscriber owns a bounded queue; one that
// falls behind by more than the bound is dropped rather than slowing the
// campaign thread.
class EventHub {
 public:
  struct Subscriber {
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<std::string> frames;
    bool terminal_queued = false;
    bool dropped = false;
  };

  explicit EventHub(std::size_t bound) : bound_(bound) {}

  std::shared_ptr<Subscriber> subscribe(const std::string& first_frame) {
    auto sub = std::make_shared<Subscriber>();
    sub->frames.push_back(first_frame);
    std::lock_guard lock(mutex_);
    subs_.push_back(sub);
    return sub;
  }

  void unsubscribe(const std::shared_ptr<Subscriber>& sub) {
    std::lock_guard lock(mutex_);
    subs_.remove(sub);
  }

  void publish(std::string_view event, const json& data, bool terminal = false) {
    std::string frame = "event: ";
    frame += event;
    frame += "\ndata: ";
    frame += data.dump();
    frame += "\n\n";
    std::lock_guard lock(mutex_);
    for (auto it = subs_.begin(); it != subs_.end();) {
      auto& sub = **it;
      bool drop = false;
      {
        std::lock_guard sl(sub.mutex);
        if (sub.frames.size() >= bound_) {
          sub.dropped = drop = true;
        } else {
          sub.frames.push_back(frame);
          sub.terminal_queued = sub.terminal_queued || terminal;
        }
      }
      sub.cv.notify_all();
      it = drop ? subs_.erase(it) : std::next(it);
    }
  }

  void close_all() {
    std::lock_guard lock(mutex_);
    for (auto& sub : subs_) {
      {
        std::lock_guard sl(sub->mutex);
        sub->dropped = true;
      }
      sub->cv.notify_all();
    }
    subs_.clear();
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return subs_.size();
  }

 private:
  std::size_t bound_;
  mutable std::mutex mutex_;
  std::list<std::shared_ptr<Subscriber>> subs_;
};

class Broadcaster : public CampaignObserver {
 public:
  explicit Broadcaster(EventHub& hub) : hub_(hub) {}

  void on_phase(double t_s, CampaignPhase phase) override {
    hub_.publish("phase", {{"t_s", t_s}, {"phase", to_string(phase)}});
  }
  void on_warning(double t_s, const std::string& message) override {
    hub_.publish("warning", {{"t_s", t_s}, {"message", message}});
  }
  void on_setpoint(double t_s, double sp_oven_c, double t_cell_c) override {
    hub_.publish("setpoint", {{"t_s", t_s}, {"sp_oven_c", sp_oven_c}, {"cell_c", t_cell_c}});
  }
  void on_voltage(double t_s, int index, double e_app_v, Branch branch) override {
    hub_.publish("voltage", {{"t_s", t_s},
                             {"index", index},
                             {"e_app_v", e_app_v},
                             {"branch", to_string(branch)}});
  }
  void on_reading(const Reading& reading) override { hub_.publish("sample", to_json(reading)); }
  void on_detection(double t_s, int index, double t_rel_s, double delta_a) override {
    hub_.publish("detection",
                 {{"t_s", t_s}, {"index", index}, {"t_rel_s", t_rel_s}, {"delta_a", delta_a}});
  }
  void on_params_applied(double t_s, const SteadyStateParams& params) override {
    json j = params_to_json(params);
    j["t_s"] = t_s;
    hub_.publish("params", j);
  }
  void on_point(double t_s, const IVPoint& point) override {
    json j = to_json(point);
    j["t_s"] = t_s;
    hub_.publish("point", j);
  }
  void on_analysis(double t_s, const AnalysisReport& report) override {
    json j = to_json(report);
    j["t_s"] = t_s;
    hub_.publish("analysis", j);
  }
  void on_finish(double t_s, CampaignPhase phase, const std::string& error) override {
    const bool ok = phase == CampaignPhase::Done;
    hub_.publish(ok ? "done" : "aborted",
                 {{"t_s", t_s}, {"phase", to_string(phase)}, {"error", error}}, true);
  }

 private:
  EventHub& hub_;
};

// Everything belonging to one started campaign. Kept after it finishes so
// its results stay queryable until the next start.
struct Run {
  std::unique_ptr<Campaign> campaign;
  std::unique_ptr<OutputWriter> writer;
  std::unique_ptr<Broadcaster> broadcaster;
  std::thread thread;
  std::atomic<bool> finished{false};
};

}  // namespace

struct Service::Impl {
  explicit Impl(ServiceOptions o) : options(std::move(o)), hub(options.subscriber_queue) {
    if (options.time_ratio < 0.0) throw ConfigError("time_ratio", "must be >= 0");
    routes();
  }

  ~Impl() { shutdown(); }

  void shutdown() {
    server.stop();
    std::shared_ptr<Run> r;
    {
      std::lock_guard lock(mutex);
      r = run;
    }
    if (r) {
      r->campaign->request_abort();
      if (r->thread.joinable()) r->thread.join();
    }
    hub.close_all();
    if (server_thread.joinable()) server_thread.join();
  }

  std::shared_ptr<Run> current() {
    std::lock_guard lock(mutex);
    return run;
  }

  void routes();
  void start_campaign(const httplib::Request& req, httplib::Response& res);
  void stream(const httplib::Request& req, httplib::Response& res);

  ServiceOptions options;
  EventHub hub;
  httplib::Server server;
  std::thread server_thread;
  std::mutex mutex;  // guards run
  std::shared_ptr<Run> run;
};

void Service::Impl::start_campaign(const httplib::Request& req, httplib::Response& res) {
  std::lock_guard lock(mutex);
  if (run && !run->finished.load()) {
    reply(res, 409, error_json("campaign", "a campaign is already running"));
    return;
  }
  CampaignConfig config;
  try {
    json merged = config_to_json(options.base_config);
    if (!req.body.empty()) merged.merge_patch(json::parse(req.body));
    config = config_from_json(merged);
  } catch (const json::exception& e) {
    reply(res, 400, error_json("body", e.what()));
    return;
  } catch (const ConfigError& e) {
    reply(res, 422, error_json(e.field(), e.what()));
    return;
  }

  if (run && run->thread.joinable()) run->thread.join();
  auto next = std::make_shared<Run>();
  try {
    next->campaign = std::make_unique<Campaign>(config.setup);
    next->writer = std::make_unique<OutputWriter>(config.output_dir, config);
  } catch (const ConfigError& e) {
    reply(res, 422, error_json(e.field(), e.what()));
    return;
  } catch (const std::exception& e) {
    reply(res, 500, error_json("output_dir", e.what()));
    return;
  }
  next->broadcaster = std::make_unique<Broadcaster>(hub);
  next->campaign->add_observer(next->writer.get());
  next->campaign->add_observer(next->broadcaster.get());
  if (options.time_ratio > 0.0) {
    const auto step = std::chrono::duration<double>(options.time_ratio);
    next->campaign->set_pacer([step] { std::this_thread::sleep_for(step); });
  }
  next->thread = std::thread([r = next.get()] {
    r->campaign->run();
    r->finished.store(true);
  });
  run = next;
  reply(res, 201, {{"status", "started"},
                   {"output_dir", config.output_dir},
                   {"points_planned", plan_voltages(config.setup.plan).size()}});
}

void Service::Impl::stream(const httplib::Request&, httplib::Response& res) {
  json hello = {{"phase", to_string(CampaignPhase::Idle)}};
  if (auto r = current()) hello = to_json(r->campaign->snapshot());
  auto sub = hub.subscribe("event: state\ndata: " + hello.dump() + "\n\n");

  res.set_header("Cache-Control", "no-cache");
  res.set_chunked_content_provider(
      "text/event-stream",
      [sub, idle = 0](size_t, httplib::DataSink& sink) mutable {
        std::string chunk;
        bool terminal = false;
        {
          std::unique_lock lock(sub->mutex);
          sub->cv.wait_for(lock, std::chrono::milliseconds(200),
                           [&] { return !sub->frames.empty() || sub->dropped; });
          if (sub->dropped && sub->frames.empty()) return false;
          while (!sub->frames.empty()) {
            chunk += sub->frames.front();
            sub->frames.pop_front();
          }
          terminal = sub->terminal_queued;
        }
        if (chunk.empty()) {
          // Periodic comment lines let a vanished client be noticed.
          if (++idle < 10) return true;
          chunk = ": keep-alive\n\n";
        }
        idle = 0;
        if (!sink.write(chunk.data(), chunk.size())) return false;
        if (terminal) sink.done();
        return true;
      },
      [this, sub](bool) { hub.unsubscribe(sub); });
}

void Service::Impl::routes() {
  server.Post("/api/campaign",
              [this](const httplib::Request& req, httplib::Response& res) { start_campaign(req, res); });

  server.Post("/api/campaign/abort", [this](const httplib::Request&, httplib::Response& res) {
    auto r = current();
    if (!r || r->finished.load()) {
      reply(res, 409, error_json("campaign", "no campaign is running"));
      return;
    }
    r->campaign->request_abort();
    reply(res, 202, {{"status", "abort requested"}});
  });

  server.Get("/api/campaign", [this](const httplib::Request&, httplib::Response& res) {
    auto r = current();
    if (!r) {
      CampaignState idle;
      idle.live_params = options.base_config.setup.steady;
      reply(res, 200, to_json(idle));
      return;
    }
    reply(res, 200, to_json(r->campaign->snapshot()));
  });

  server.Get("/api/params", [this](const httplib::Request&, httplib::Response& res) {
    auto r = current();
    if (!r) {
      json j = params_to_json(options.base_config.setup.steady);
      j["pending"] = nullptr;
      reply(res, 200, j);
      return;
    }
    const CampaignState s = r->campaign->snapshot();
    json j = params_to_json(s.live_params);
    j["pending"] = s.pending_params ? params_to_json(*s.pending_params) : json(nullptr);
    reply(res, 200, j);
  });

  server.Patch("/api/params", [this](const httplib::Request& req, httplib::Response& res) {
    auto r = current();
    if (!r || r->finished.load()) {
      reply(res, 409, error_json("campaign", "no campaign is running"));
      return;
    }
    ParamPatch patch;
    try {
      patch = patch_from_json(json::parse(req.body));
    } catch (const json::exception& e) {
      reply(res, 400, error_json("body", e.what()));
      return;
    } catch (const ConfigError& e) {
      reply(res, 422, error_json(e.field(), e.what()));
      return;
    }
    const PatchResult result = r->campaign->update_live_params(patch);
    if (!result.accepted) {
      reply(res, 422, errors_json(result.errors));
      return;
    }
    reply(res, 202, {{"accepted", true}, {"queued", params_to_json(result.queued)}});
  });

  server.Get("/api/iv", [this](const httplib::Request&, httplib::Response& res) {
    json rows = json::array();
    if (auto r = current()) {
      for (const auto& p : r->writer->iv_rows()) rows.push_back(to_json(p));
    }
    reply(res, 200, {{"rows", std::move(rows)}});
  });

  server.Get("/api/conductivity", [this](const httplib::Request&, httplib::Response& res) {
    auto r = current();
    if (!r) {
      reply(res, 200, to_json(AnalysisReport{}));
      return;
    }
    const auto& setup = r->campaign->setup();
    const IVCurve rows = r->writer->iv_rows();
    reply(res, 200,
          to_json(analyze_curve(rows, setup.plant.geometry, setup.plant.reference,
                                setup.plant.constants, setup.analysis)));
  });

  server.Get("/api/trace/current", [this](const httplib::Request&, httplib::Response& res) {
    json samples = json::array();
    json body = {{"index", -1}, {"e_app_v", nullptr}};
    if (auto r = current()) {
      const CampaignState s = r->campaign->snapshot();
      body["index"] = s.current_index;
      body["e_app_v"] = s.current_voltage;
      for (const auto& reading : r->campaign->current_readings()) samples.push_back(to_json(reading));
    }
    body["samples"] = std::move(samples);
    reply(res, 200, body);
  });

  server.Get("/api/stream",
             [this](const httplib::Request& req, httplib::Response& res) { stream(req, res); });

  std::error_code ec;
  if (std::filesystem::is_directory(options.ui_dir, ec)) {
    server.set_mount_point("/", options.ui_dir.string());
  }
}

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() = default;

int Service::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw std::runtime_error("cannot bind " + host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->server_thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void Service::run(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port)) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->server.listen_after_bind();
}

void Service::stop() { impl_->shutdown(); }

}  // namespace hwbench
