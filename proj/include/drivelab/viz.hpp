#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "drivelab/env.hpp"

namespace drivelab {

struct TelemetrySnapshot {
  std::uint64_t episode = 0;
  std::uint64_t tick = 0;
  double reward = 0.0;
  double reward_mean_100 = 0.0;
  EpisodeMetrics metrics;        // over the last 20 finished episodes
  std::vector<std::uint8_t> frame;  // PNG of the display modality, may be empty
  std::string ts;                // ISO-8601 UTC
};

/// Status document without the frame.
nlohmann::json status_json(const TelemetrySnapshot& s);
nlohmann::json metrics_json(const EpisodeMetrics& m);

/// Latest-value slot. Readers copy the pointer under a short lock and
/// never hold it across I/O, so publish does not wait on slow readers.
class Mailbox {
 public:
  void publish(std::shared_ptr<const TelemetrySnapshot> s);
  std::shared_ptr<const TelemetrySnapshot> latest() const;
  std::uint64_t version() const { return version_.load(std::memory_order_acquire); }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const TelemetrySnapshot> latest_;
  std::atomic<std::uint64_t> version_{0};
};

/// Turns the step stream of an env loop into snapshots with rolling
/// windows (100 steps of reward, 20 episodes of metrics).
class TelemetryTracker {
 public:
  static constexpr std::size_t kRewardWindow = 100;
  static constexpr std::size_t kEpisodeWindow = 20;

  std::shared_ptr<TelemetrySnapshot> on_step(const Env& env, const StepResult& step);

 private:
  bool any_ = false;
  std::uint64_t episode_ = 0;
  std::uint64_t last_tick_ = 0;
  std::deque<double> rewards_;
  EpisodeOutcome current_;
  std::deque<EpisodeOutcome> finished_;
};

std::string iso8601_now();

class VizServer {
 public:
  /// Serves GET /status, /frame, /stream and the dashboard at /. Assets
  /// come from `assets` when it holds an index.html, else a built-in page.
  VizServer(std::string host, std::uint16_t port, std::optional<std::filesystem::path> assets = std::nullopt);
  ~VizServer();
  VizServer(const VizServer&) = delete;
  VizServer& operator=(const VizServer&) = delete;

  void start();
  void stop();
  std::uint16_t port() const { return port_; }
  Mailbox& mailbox() { return mailbox_; }
  void publish(std::shared_ptr<const TelemetrySnapshot> s) { mailbox_.publish(std::move(s)); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Mailbox mailbox_;
  std::uint16_t port_ = 0;
};

/// Step observer feeding a tracker and publishing into a mailbox.
StepObserver make_publisher(Mailbox& mailbox, std::shared_ptr<TelemetryTracker> tracker);

}  // namespace drivelab
