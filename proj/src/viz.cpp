#include "drivelab/viz.hpp"

#include <httplib.h>

#include <chrono>
#include <ctime>
#include <thread>

#include "drivelab/errors.hpp"
#include "drivelab/image_codec.hpp"

namespace drivelab {

using nlohmann::json;

json metrics_json(const EpisodeMetrics& m) {
  auto stat = [](const Stat& s) { return json{{"mean", s.mean}, {"stderr", s.se}}; };
  return {{"episodes", m.episodes},
          {"success_rate", stat(m.success_rate)},
          {"collision_rate", stat(m.collision_rate)},
          {"out_of_lane_rate", stat(m.out_of_lane_rate)},
          {"timeout_rate", stat(m.timeout_rate)},
          {"avg_speed", stat(m.avg_speed)}};
}

json status_json(const TelemetrySnapshot& s) {
  return {{"episode", s.episode},       {"tick", s.tick},
          {"reward", s.reward},         {"reward_mean_100", s.reward_mean_100},
          {"metrics", metrics_json(s.metrics)}, {"ts", s.ts}};
}

void Mailbox::publish(std::shared_ptr<const TelemetrySnapshot> s) {
  {
    std::lock_guard lock(mu_);
    latest_.swap(s);
  }
  version_.fetch_add(1, std::memory_order_release);
  // the previous snapshot (now in s) is released outside the lock
}

std::shared_ptr<const TelemetrySnapshot> Mailbox::latest() const {
  std::lock_guard lock(mu_);
  return latest_;
}

std::string iso8601_now() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const std::time_t t = system_clock::to_time_t(now);
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  const std::size_t n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::snprintf(buf + n, sizeof buf - n, ".%03dZ", static_cast<int>(ms));
  return buf;
}

std::shared_ptr<TelemetrySnapshot> TelemetryTracker::on_step(const Env& env, const StepResult& step) {
  if (!any_) {
    any_ = true;
  } else if (step.info.tick <= last_tick_) {
    ++episode_;
  }
  if (step.info.tick == 1) current_ = EpisodeOutcome{};
  last_tick_ = step.info.tick;

  rewards_.push_back(step.reward);
  if (rewards_.size() > kRewardWindow) {
    rewards_.pop_front();
  }
  ++current_.steps;
  current_.speed_sum += std::abs(step.info.ego_speed);
  current_.total_reward += step.reward;
  if (step.info.cause) {
    current_.cause = *step.info.cause;
    finished_.push_back(current_);
    if (finished_.size() > kEpisodeWindow) finished_.pop_front();
    current_ = EpisodeOutcome{};
  }

  auto snap = std::make_shared<TelemetrySnapshot>();
  snap->episode = episode_;
  snap->tick = step.info.tick;
  snap->reward = step.reward;
  double sum = 0.0;
  for (double r : rewards_) sum += r;
  snap->reward_mean_100 = sum / static_cast<double>(rewards_.size());
  snap->metrics = aggregate({finished_.begin(), finished_.end()});
  if (const Payload* p = step.obs.find(env.config().display))
    if (const auto* img = std::get_if<Image>(p)) snap->frame = encode_png(*img);
  snap->ts = iso8601_now();
  return snap;
}

StepObserver make_publisher(Mailbox& mailbox, std::shared_ptr<TelemetryTracker> tracker) {
  return [&mailbox, tracker](const Env& env, const StepResult& step) { mailbox.publish(tracker->on_step(env, step)); };
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kFallbackPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>drivelab</title>
<style>body{font-family:sans-serif;background:#111;color:#ddd}img{image-rendering:pixelated;width:384px}
td{padding:2px 8px}</style></head>
<body><h3>drivelab</h3><div id="banner"></div>
<img src="/stream" alt="frame"><table id="stats"></table>
<script>
async function poll(){
  try{
    const r=await fetch('/status');
    if(r.status===503){document.getElementById('banner').textContent='no data yet';return;}
    const s=await r.json();document.getElementById('banner').textContent='';
    const m=s.metrics;const f=x=>x.mean.toFixed(2)+' ± '+x.stderr.toFixed(2);
    document.getElementById('stats').innerHTML=
      `<tr><td>episode</td><td>${s.episode}</td></tr><tr><td>tick</td><td>${s.tick}</td></tr>`+
      `<tr><td>reward</td><td>${s.reward.toFixed(3)}</td></tr><tr><td>mean reward (100)</td><td>${s.reward_mean_100.toFixed(3)}</td></tr>`+
      `<tr><td>success %</td><td>${f(m.success_rate)}</td></tr><tr><td>collision %</td><td>${f(m.collision_rate)}</td></tr>`+
      `<tr><td>avg speed</td><td>${f(m.avg_speed)}</td></tr>`;
  }catch(e){document.getElementById('banner').textContent='reconnecting...';}
}
setInterval(poll,500);poll();
</script></body></html>
)";

constexpr auto kFrameInterval = std::chrono::milliseconds(100);  // 10 fps cap

}  // namespace

struct VizServer::Impl {
  httplib::Server server;
  std::string host;
  std::thread thread;
  std::atomic<bool> stopping{false};
};

VizServer::VizServer(std::string host, std::uint16_t port, std::optional<std::filesystem::path> assets)
    : impl_(std::make_unique<Impl>()) {
  impl_->host = std::move(host);
  auto& svr = impl_->server;
  Mailbox* box = &mailbox_;
  std::atomic<bool>* stopping = &impl_->stopping;

  auto no_data = [](httplib::Response& res) {
    res.status = 503;
    res.set_content(R"({"status":"no data"})", "application/json");
  };

  svr.Get("/status", [box, no_data](const httplib::Request&, httplib::Response& res) {
    auto s = box->latest();
    if (!s) return no_data(res);
    res.set_content(status_json(*s).dump(), "application/json");
  });

  svr.Get("/frame", [box, no_data](const httplib::Request&, httplib::Response& res) {
    auto s = box->latest();
    if (!s || s->frame.empty()) return no_data(res);
    res.set_content(std::string(s->frame.begin(), s->frame.end()), "image/png");
  });

  svr.Get("/stream", [box, stopping](const httplib::Request&, httplib::Response& res) {
    auto last_version = std::make_shared<std::uint64_t>(0);
    res.set_content_provider(
        "multipart/x-mixed-replace; boundary=frame",
        [box, stopping, last_version](std::size_t, httplib::DataSink& sink) {
          const auto next_due = std::chrono::steady_clock::now() + kFrameInterval;
          if (stopping->load()) return false;
          const std::uint64_t v = box->version();
          auto s = box->latest();
          if (s && !s->frame.empty() && v != *last_version) {
            *last_version = v;
            std::string part = "--frame\r\nContent-Type: image/png\r\nContent-Length: " +
                               std::to_string(s->frame.size()) + "\r\n\r\n";
            part.append(s->frame.begin(), s->frame.end());
            part += "\r\n";
            if (!sink.write(part.data(), part.size())) return false;
          }
          std::this_thread::sleep_until(next_due);
          return !stopping->load();
        });
  });

  const bool use_assets = assets && std::filesystem::exists(*assets / "index.html");
  if (use_assets) {
    if (!svr.set_mount_point("/", assets->string())) throw ConfigError("cannot serve assets from " + assets->string());
  } else {
    auto page = [](const httplib::Request&, httplib::Response& res) { res.set_content(kFallbackPage, "text/html"); };
    svr.Get("/", page);
    svr.Get("/index.html", page);
  }

  svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) res.set_content(R"({"error":"not found"})", "application/json");
  });

  if (port == 0) {
    const int p = svr.bind_to_any_port(impl_->host);
    if (p <= 0) throw ConfigError("viz server cannot bind " + impl_->host);
    port_ = static_cast<std::uint16_t>(p);
  } else {
    if (!svr.bind_to_port(impl_->host, port)) throw ConfigError("viz server cannot bind " + impl_->host + ":" + std::to_string(port));
    port_ = port;
  }
}

VizServer::~VizServer() { stop(); }

void VizServer::start() {
  if (impl_->thread.joinable()) return;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void VizServer::stop() {
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace drivelab
