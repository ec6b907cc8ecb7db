#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "drivelab/observer.hpp"
#include "drivelab/planning.hpp"
#include "drivelab/world.hpp"

namespace drivelab {

enum class Difficulty { simple, medium, hard };
enum class TerminationCause { destination, collision, out_of_lane, timeout };

std::string_view to_string(Difficulty d);
std::string_view to_string(TerminationCause c);
std::optional<TerminationCause> parse_cause(std::string_view s);

struct RewardConfig {
  double alpha = 1.0;
  double beta = 0.5;
  double gamma = 100.0;
  double waypoint_bonus = 5.0;
  double out_of_lane_penalty = 20.0;
  double destination_bonus = 100.0;
};

/// Step events that feed the bonus terms.
struct RewardEvents {
  bool collided = false;
  std::size_t waypoints_reached = 0;
  bool destination = false;
  bool out_of_lane = false;
  double signal = 0.0;  // from signal_compliance_reward
};

struct RewardTerms {
  double v_parallel = 0.0;
  double v_perp = 0.0;
  int collision = 0;
  std::size_t waypoints_reached = 0;
  double signal = 0.0;
  double bonus_terms = 0.0;
  double total = 0.0;
  bool operator==(const RewardTerms&) const = default;
};

/// Speed reward against the direction to the cursor waypoint, minus the
/// collision penalty, plus waypoint/destination/signal bonuses and the
/// out-of-lane penalty.
RewardTerms compute_reward(const WorldState& curr, ActorId ego, const Route& route, const RewardConfig& cfg,
                           const RewardEvents& events);

/// Red-light running (-gamma) and completed stop-sign stops
/// (+waypoint_bonus, once per sign) between two consecutive states.
double signal_compliance_reward(const WorldState& prev, const WorldState& curr, ActorId ego,
                                const RewardConfig& cfg);

struct TrafficFlow {
  std::vector<std::string> spawn_lanes;
  std::array<int, 3> counts{0, 4, 8};  // simple, medium, hard
  bool respawn = true;
  std::optional<AutopilotConfig> behavior;  // defaults by difficulty
  std::vector<SpawnSpec> fixed;             // always spawned, before the random ones
  double min_clearance = 7.5;               // m between spawned vehicle centers

  int count(Difficulty d) const { return counts[static_cast<std::size_t>(d)]; }
  AutopilotConfig behavior_for(Difficulty d) const;
};

struct TaskConfig {
  std::string name;
  std::string map;  // file name under the map directory, or a path
  SpawnSpec ego;
  TrafficFlow traffic;
  PlannerKind planner = RandomRoam{};
  Difficulty difficulty = Difficulty::simple;
  VisibilityConfig visibility;
  IntentionConfig intention;
  std::vector<std::string> modalities{"bev", "lidar", "state_vector"};
  std::string display = "bev";  // modality published to the viz server
  RewardConfig reward;
  double time_limit = 60.0;
  double out_of_lane_limit = 1.0;
  std::optional<double> distance_budget;  // roam tasks succeed after this many meters
  AutopilotConfig ego_autopilot{};        // used by the autopilot baseline agent
  BevSpec bev;
  LidarSpec lidar;
  DynamicsParams dynamics;
};

/// Lateral distance of a point beyond the half-width of its nearest lane.
double lane_excess(const RoadMap& map, Vec2 p);

/// Priority: collision > out_of_lane > destination > timeout.
std::optional<TerminationCause> check_termination(const WorldState& world, ActorId ego, const Route& route,
                                                  const TaskConfig& cfg, bool collided);

const std::vector<std::string>& task_names();

/// Registered task with a JSON override document applied. Keys are
/// dot-separated field paths ("visibility.mode") or nested objects.
/// Throws ConfigError on unknown task names or fields.
TaskConfig make_task(const std::string& name, const nlohmann::json& overrides = nlohmann::json::object());

/// Full config as JSON, and back (strict: unknown fields are rejected).
nlohmann::json task_to_json(const TaskConfig& cfg);
TaskConfig task_from_json(const nlohmann::json& doc);

/// Validates a config against the built-in handlers and map directory.
void validate_task(const TaskConfig& cfg);

}  // namespace drivelab
