#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "drivelab/env.hpp"

namespace drivelab {

// JSON encodings shared by the wire server and rollout logs.
nlohmann::json payload_json(const Payload& p);
nlohmann::json bundle_json(const ObservationBundle& b);
nlohmann::json terms_json(const RewardTerms& t);
nlohmann::json info_json(const StepInfo& info);
nlohmann::json reset_json(const ResetResult& r);
nlohmann::json step_json(const StepResult& r);

/// Action from [throttle, steer] or a discrete index. Throws ProtocolError.
Action action_from_json(const nlohmann::json& j);

using TaskFactory = std::function<TaskConfig(const std::string& task, const nlohmann::json& overrides)>;

/// Command interpreter for one client connection. Environment ids are
/// per-session and start at 0.
class WireSession {
 public:
  explicit WireSession(TaskFactory factory = make_task);
  /// Handles one request line and returns the response line (no newline).
  std::string handle_line(const std::string& line);
  nlohmann::json handle(const nlohmann::json& request);
  std::size_t open_envs() const { return envs_.size(); }

 private:
  Env& env_for(const nlohmann::json& request);

  TaskFactory factory_;
  std::map<std::int64_t, std::unique_ptr<Env>> envs_;
  std::int64_t next_id_ = 0;
};

/// Newline-delimited JSON over TCP, one thread per client.
class WireServer {
 public:
  WireServer(const std::string& host, std::uint16_t port, TaskFactory factory = make_task);
  ~WireServer();
  WireServer(const WireServer&) = delete;
  WireServer& operator=(const WireServer&) = delete;

  std::uint16_t port() const;
  /// Accepts clients on a background thread.
  void start();
  /// Accepts clients on the calling thread until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// "host:port" or ":port" or "port".
std::pair<std::string, std::uint16_t> parse_address(const std::string& addr, const std::string& default_host = "127.0.0.1");

}  // namespace drivelab
