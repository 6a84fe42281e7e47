#include "hwbench/csv.hpp"
#include "hwbench/service.hpp"

#include "test_support.hpp"

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

using namespace hwbench;
using nlohmann::json;
namespace fs = std::filesystem;
using namespace std::chrono_literals;

namespace {

CampaignConfig small_campaign(const fs::path& out) {
  CampaignConfig c;
  c.setup.plant.initial_oven_c = 700.0;
  c.setup.plant.initial_cell_c = 692.0;
  c.setup.loop.sp_oven_offset_c = 8.0;
  c.setup.plan = ScanPlan{0.0, -0.1, 0.1, 0.0, 0.05, ScanMode::DUD};
  c.output_dir = out.string();
  return c;
}

IVCurve read_iv(const fs::path& p) {
  std::ifstream in(p);
  return parse_iv_csv(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Frame {
  std::string event;
  json data;
};

// Collects server-sent events on a background thread.
class StreamReader {
 public:
  StreamReader(int port, std::function<void(const Frame&)> on_frame = {})
      : client_("127.0.0.1", port), on_frame_(std::move(on_frame)) {
    client_.set_read_timeout(30, 0);
    thread_ = std::thread([this] {
      client_.Get("/api/stream", [this](const char* data, size_t n) {
        buffer_.append(data, n);
        for (auto pos = buffer_.find("\n\n"); pos != std::string::npos; pos = buffer_.find("\n\n")) {
          const std::string block = buffer_.substr(0, pos);
          buffer_.erase(0, pos + 2);
          if (block.rfind("event: ", 0) != 0) continue;
          const auto nl = block.find('\n');
          Frame f{block.substr(7, nl - 7), json::parse(block.substr(nl + 7))};
          if (on_frame_) on_frame_(f);
          std::lock_guard lock(mutex_);
          frames_.push_back(std::move(f));
        }
        return true;
      });
      ended_ = true;
    });
  }
  ~StreamReader() {
    client_.stop();
    if (thread_.joinable()) thread_.join();
  }

  void join() { thread_.join(); }
  bool ended() const { return ended_; }
  std::vector<Frame> frames() const {
    std::lock_guard lock(mutex_);
    return frames_;
  }

 private:
  httplib::Client client_;
  std::function<void(const Frame&)> on_frame_;
  std::string buffer_;
  mutable std::mutex mutex_;
  std::vector<Frame> frames_;
  std::atomic<bool> ended_{false};
  std::thread thread_;
};

template <typename F>
bool wait_for(F condition, std::chrono::milliseconds limit = 20s) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < deadline) {
    if (condition()) return true;
    std::this_thread::sleep_for(5ms);
  }
  return condition();
}

json get_json(httplib::Client& cli, const std::string& path) {
  auto res = cli.Get(path);
  REQUIRE(res);
  REQUIRE(res->status == 200);
  return json::parse(res->body);
}

}  // namespace

TEST_CASE("idle service answers queries and refuses commands") {
  const auto dir = test::scratch_dir("service_idle");
  ServiceOptions opt;
  opt.base_config = small_campaign(dir / "run");
  opt.ui_dir = dir / "no-ui";
  Service service(opt);
  const int port = service.start("127.0.0.1", 0);
  httplib::Client cli("127.0.0.1", port);

  CHECK(get_json(cli, "/api/campaign").at("phase") == "Idle");
  const auto params = get_json(cli, "/api/params");
  CHECK(params.at("s_threshold_a") == 3e-9);
  CHECK(params.at("pending").is_null());
  CHECK(get_json(cli, "/api/iv").at("rows").empty());
  CHECK(get_json(cli, "/api/conductivity").at("points").empty());
  CHECK(get_json(cli, "/api/trace/current").at("samples").empty());

  auto res = cli.Patch("/api/params", R"({"s_threshold_a": 1e-8})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 409);
  res = cli.Post("/api/campaign/abort", "", "application/json");
  REQUIRE(res);
  CHECK(res->status == 409);

  res = cli.Post("/api/campaign", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  res = cli.Post("/api/campaign", R"({"steady_state": {"nw_s": 0}})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 422);
  CHECK(json::parse(res->body).at("errors").at(0).at("field") == "steady_state.nw_s");
  CHECK(get_json(cli, "/api/campaign").at("phase") == "Idle");
  service.stop();
}

TEST_CASE("steering a live campaign") {
  const auto dir = test::scratch_dir("service_live");
  ServiceOptions opt;
  opt.base_config = small_campaign(dir / "unused");
  opt.time_ratio = 0.01;
  opt.ui_dir = dir / "no-ui";
  Service service(opt);
  const int port = service.start("127.0.0.1", 0);
  httplib::Client cli("127.0.0.1", port);
  const fs::path out = dir / "run";
  const fs::path iv = out / "iv.csv";

  // Every point event must already be durable in iv.csv.
  std::atomic<int> incoherent{0};
  std::atomic<int> points_seen{0};
  StreamReader stream(port, [&](const Frame& f) {
    if (f.event != "point") return;
    ++points_seen;
    const auto rows = read_iv(iv);
    const int index = f.data.at("index");
    if (static_cast<int>(rows.size()) <= index || rows[static_cast<std::size_t>(index)].index != index) ++incoherent;
  });
  REQUIRE(wait_for([&] { return !stream.frames().empty(); }));
  CHECK(stream.frames().front().event == "state");

  const json body = {{"output_dir", out.string()}};
  auto res = cli.Post("/api/campaign", body.dump(), "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 201);
  CHECK(json::parse(res->body).at("points_planned") == 9);
  res = cli.Post("/api/campaign", body.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 409);

  REQUIRE(wait_for([&] { return get_json(cli, "/api/campaign").at("phase") == "Scanning"; }));

  {
    res = cli.Patch("/api/params", R"({"nw_s": 0})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 422);
    CHECK(json::parse(res->body).at("errors").at(0).at("field") == "nw_s");
    CHECK(get_json(cli, "/api/params").at("pending").is_null());

    res = cli.Patch("/api/params", R"({"bogus": 1})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 422);
    res = cli.Patch("/api/params", "[", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);

    res = cli.Patch("/api/params", R"({"s_threshold_a": 1e-8})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 202);
    CHECK(json::parse(res->body).at("queued").at("s_threshold_a") == 1e-8);
    CHECK(wait_for([&] { return get_json(cli, "/api/params").at("s_threshold_a") == 1e-8; }));
    CHECK(get_json(cli, "/api/params").at("pending").is_null());
    CHECK(wait_for([&] {
      return slurp(out / "events.log").find("params applied np_s=5 nw_s=5 s_threshold_a=1.00000000e-08") !=
             std::string::npos;
    }));
  }

  // /api/iv against the file: equal whenever the file did not change around the request.
  int exact_matches = 0;
  for (int attempt = 0; attempt < 200 && exact_matches < 3; ++attempt) {
    const auto before = read_iv(iv);
    const auto served = get_json(cli, "/api/iv").at("rows");
    const auto after = read_iv(iv);
    REQUIRE(served.size() >= before.size());
    REQUIRE(served.size() <= after.size());
    for (std::size_t i = 0; i < served.size(); ++i) {
      REQUIRE(served[i].at("index") == after[i].index);
      REQUIRE(served[i].at("i_ss_a") == after[i].i_ss_a);
      REQUIRE(served[i].at("e_app_v") == after[i].e_app_v);
    }
    if (before == after && served.size() == after.size() && !after.empty()) ++exact_matches;
    std::this_thread::sleep_for(20ms);
  }
  CHECK(exact_matches >= 1);

  const auto trace = get_json(cli, "/api/trace/current");
  CHECK(trace.at("index").get<int>() >= 0);

  REQUIRE(wait_for([&] { return get_json(cli, "/api/campaign").at("points_done") >= 5; }));
  res = cli.Post("/api/campaign/abort", "", "application/json");
  REQUIRE(res);
  CHECK(res->status == 202);
  REQUIRE(wait_for([&] { return stream.ended(); }));

  const auto frames = stream.frames();
  REQUIRE_FALSE(frames.empty());
  CHECK(frames.back().event == "aborted");
  CHECK(incoherent == 0);
  CHECK(points_seen >= 5);
  int samples = 0;
  for (const auto& f : frames) samples += f.event == "sample";
  CHECK(samples > 50);
  CHECK(get_json(cli, "/api/campaign").at("phase") == "Aborted");

  const auto rows = read_iv(iv);
  CHECK(static_cast<int>(rows.size()) == points_seen);
  CHECK(slurp(out / "events.log").find("finish phase=Aborted") != std::string::npos);
  for (const auto& entry : fs::directory_iterator(out)) {
    if (entry.path().filename().string().rfind("trace_", 0) != 0) continue;
    std::ifstream in(entry.path());
    CHECK_NOTHROW(parse_trace_csv(in));
  }

  // A finished campaign can be replaced by a new one.
  res = cli.Post("/api/campaign", json({{"output_dir", (dir / "run2").string()}}).dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 201);
  service.stop();
}

TEST_CASE("a subscriber that stops reading is dropped without stalling the campaign") {
  const auto dir = test::scratch_dir("service_slow");
  ServiceOptions opt;
  opt.base_config = small_campaign(dir / "run");
  opt.base_config.setup.plan = ScanPlan{};
  // Paced just enough that a reading client keeps up with the stream.
  opt.time_ratio = 0.0002;
  opt.subscriber_queue = 512;
  opt.ui_dir = dir / "no-ui";
  Service service(opt);
  const int port = service.start("127.0.0.1", 0);

  // A raw connection with a tiny receive window that never reads.
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(fd >= 0);
  const int small = 1024;
  ::setsockopt(fd, SOL_SOCKET, SO_RCVBUF, &small, sizeof small);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<uint16_t>(port));
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  const std::string request = "GET /api/stream HTTP/1.1\r\nHost: localhost\r\n\r\n";
  REQUIRE(::send(fd, request.data(), request.size(), 0) == static_cast<ssize_t>(request.size()));

  StreamReader fast(port);
  REQUIRE(wait_for([&] { return !fast.frames().empty(); }));

  httplib::Client cli("127.0.0.1", port);
  const auto started = std::chrono::steady_clock::now();
  auto res = cli.Post("/api/campaign", "{}", "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 201);
  REQUIRE(wait_for([&] { return fast.ended(); }, 60s));
  CHECK(std::chrono::steady_clock::now() - started < 30s);
  CHECK(fast.frames().back().event == "done");
  CHECK(get_json(cli, "/api/campaign").at("phase") == "Done");

  // Draining the stalled connection now shows a stream cut short.
  timeval tv{5, 0};
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  std::string received;
  char buf[65536];
  for (;;) {
    const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
    if (n <= 0) break;
    received.append(buf, static_cast<std::size_t>(n));
  }
  ::close(fd);
  CHECK(received.find("event: state") != std::string::npos);
  CHECK(received.find("event: done") == std::string::npos);
  service.stop();
}
