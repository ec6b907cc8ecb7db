#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "drivelab/observer.hpp"
#include "drivelab/planning.hpp"
#include "drivelab/task.hpp"
#include "drivelab/world.hpp"

namespace drivelab {

struct Action {
  double throttle = 0.0;
  double steer_cmd = 0.0;

  /// Index into the 15-action grid: throttle {-1, 0, 1} x steer
  /// {-0.6, -0.2, 0, 0.2, 0.6}, index = 5 * throttle_idx + steer_idx.
  static Action discrete(int index);
  Action clamped() const;
  bool operator==(const Action&) const = default;
};

inline constexpr int kDiscreteActions = 15;

struct StepInfo {
  RewardTerms terms;
  std::optional<TerminationCause> cause;
  std::uint64_t tick = 0;
  double sim_time = 0.0;
  double ego_speed = 0.0;
  std::size_t actors = 0;
};

struct ResetResult {
  ObservationBundle obs;
  StepInfo info;
};

struct StepResult {
  ObservationBundle obs;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  StepInfo info;
};

/// One episode at a time over a task. Not thread-safe; confine to one
/// worker.
class Env {
 public:
  explicit Env(TaskConfig cfg);

  const TaskConfig& config() const { return cfg_; }
  const WorldState& world() const { return world_; }
  ActorId ego() const { return ego_; }
  const Route& ego_route() const;
  bool episode_active() const { return started_ && !finished_; }
  const Observer& observer() const { return observer_; }
  Observer& observer() { return observer_; }

  /// Rebuilds the world: ego, traffic, routes. Throws ConfigError when
  /// spawning fails after 100 placement attempts.
  ResetResult reset(std::uint64_t seed);

  /// Throws ProtocolError before reset or after the episode ended.
  StepResult step(const Action& action);

 private:
  bool place_traffic(bool at_entry);
  void respawn_finished();
  ObservationBundle observe() const;

  TaskConfig cfg_;
  std::shared_ptr<const RoadMap> map_;
  std::unique_ptr<RoutePlanner> ego_planner_;
  std::unique_ptr<RoutePlanner> roam_;
  Observer observer_;
  WorldState world_;
  ActorId ego_{};
  bool started_ = false;
  bool finished_ = false;
};

/// Shared, immutable map instance per resolved path.
std::shared_ptr<const RoadMap> load_map_cached(const std::string& name);

// ---------------------------------------------------------------------------
// baseline agents and metrics

using Agent = std::function<Action(const Env&, const ObservationBundle&)>;
using AgentFactory = std::function<Agent(std::uint64_t episode_seed)>;

/// "autopilot", "random" or "zero". Throws ConfigError otherwise.
AgentFactory make_agent(const std::string& name);
const std::vector<std::string>& agent_names();

struct EpisodeOutcome {
  std::uint64_t seed = 0;
  TerminationCause cause = TerminationCause::timeout;
  std::size_t steps = 0;
  double speed_sum = 0.0;  // sum of |ego speed| over steps
  double total_reward = 0.0;
};

struct Stat {
  double mean = 0.0;
  double se = 0.0;
};

struct EpisodeMetrics {
  std::size_t episodes = 0;
  Stat success_rate;  // percent
  Stat collision_rate;
  Stat out_of_lane_rate;
  Stat timeout_rate;
  Stat avg_speed;  // m/s
};

/// Rates over per-episode outcomes; avg_speed over all steps of all
/// episodes, its error over per-episode means.
EpisodeMetrics aggregate(const std::vector<EpisodeOutcome>& outcomes);

using StepObserver = std::function<void(const Env&, const StepResult&)>;

EpisodeOutcome run_episode(Env& env, const Agent& agent, std::uint64_t seed, const StepObserver& on_step = {});

/// Episodes use seeds seed_base .. seed_base + episodes - 1. An agent or
/// environment failure is rethrown naming the episode index.
EpisodeMetrics evaluate(Env& env, const AgentFactory& agent, std::size_t episodes, std::uint64_t seed_base,
                        std::vector<EpisodeOutcome>* outcomes = nullptr, const StepObserver& on_step = {});

}  // namespace drivelab
