#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "drivelab/geometry.hpp"
#include "drivelab/rng.hpp"
#include "drivelab/road_map.hpp"
#include "drivelab/route.hpp"

namespace drivelab {

struct ActorId {
  std::uint32_t value = 0;
  auto operator<=>(const ActorId&) const = default;
};

enum class Role { ego, background };
enum class Controller { external, autopilot };
enum class Aggression { lawful, aggressive };

struct AutopilotConfig {
  double target_speed = 5.0;      // m/s, > 0
  double headway_distance = 10.0; // m, >= 0
  Aggression aggression = Aggression::lawful;
};

struct DynamicsParams {
  double dt = 0.1;          // s
  double max_accel = 3.0;   // m/s^2
  double max_speed = 12.0;  // m/s
  double min_speed = -2.0;  // m/s, reverse floor
  double max_steer = 0.6;   // rad
  double wheelbase_ratio = 0.6;
};

struct Blueprint {
  double length = 4.5;
  double width = 2.0;
};

struct VehicleState {
  ActorId id{};
  Pose pose{};
  double speed = 0.0;  // signed, m/s
  double steer = 0.0;  // rad
  double length = 4.5;
  double width = 2.0;
  Role role = Role::background;
  Controller controller = Controller::external;
  std::optional<AutopilotConfig> autopilot;
  double odometer = 0.0;  // meters travelled (absolute)

  double wheelbase(const DynamicsParams& p) const { return p.wheelbase_ratio * length; }
  OrientedRect footprint() const { return {pose.position, pose.heading, length, width}; }
};

struct SpawnSpec {
  std::string lane;
  double offset = 0.0;  // arc length along the lane
  double speed = 0.0;
  Controller controller = Controller::external;
  Role role = Role::background;
  Blueprint blueprint{};
  std::optional<AutopilotConfig> autopilot;
};

struct Control {
  double throttle = 0.0;   // [-1, 1]
  double steer_cmd = 0.0;  // [-1, 1]
  bool operator==(const Control&) const = default;
};

using Controls = std::map<ActorId, Control>;

/// Single source of simulation truth. Value type; copy to snapshot.
struct WorldState {
  std::shared_ptr<const RoadMap> map;
  DynamicsParams dynamics{};
  std::uint64_t tick = 0;
  std::map<ActorId, VehicleState> actors;
  std::map<ActorId, Route> routes;
  std::map<std::string, SignalPhase> signal_states;
  // (actor, stop sign id) pairs that have completed a full stop at the sign
  std::set<std::pair<ActorId, std::string>> stops_completed;
  Rng rng{0};
  std::uint64_t seed = 0;
  std::uint32_t next_id = 1;

  double sim_time() const { return static_cast<double>(tick) * dynamics.dt; }
  const VehicleState& actor(ActorId id) const;
  VehicleState& actor(ActorId id);
  bool has_actor(ActorId id) const { return actors.contains(id); }
};

/// Fresh world over a map, seeded.
WorldState make_world(std::shared_ptr<const RoadMap> map, std::uint64_t seed,
                      DynamicsParams dynamics = {});

/// Spawns a vehicle on the lane centerline at spec.offset, heading along the
/// lane tangent. Throws SimulationError on overlap or out-of-range offset.
ActorId spawn_vehicle(WorldState& world, const SpawnSpec& spec);

/// True when a vehicle with the given footprint would overlap an actor.
bool footprint_free(const WorldState& world, const OrientedRect& rect);

/// Removes a single actor and its route.
void destroy_actor(WorldState& world, ActorId id);

/// Removes every actor, resets tick and signal state, and reseeds the
/// generator from the episode seed.
void destroy_all(WorldState& world, std::uint64_t seed);
inline void destroy_all(WorldState& world) { destroy_all(world, world.seed); }

/// Advances one fixed step with the kinematic bicycle model. Autopilot
/// actors compute their own controls; any other actor missing from
/// `controls` holds zero control. Throws SimulationError for unknown ids.
void tick(WorldState& world, const Controls& controls);

/// One integration step for a single vehicle (exposed for tests).
void integrate(VehicleState& v, Control c, const DynamicsParams& p);

/// Unordered unique colliding pairs (first < second), sorted.
std::vector<std::pair<ActorId, ActorId>> detect_collisions(const WorldState& world);

/// Recomputes signal_states from sim_time.
void update_signals(WorldState& world);

/// Canonical byte-exact encoding of the state (doubles as hex bit patterns).
std::string canonical_state(const WorldState& world);

/// Lookup of the phase of a signal at the current sim time.
SignalPhase signal_phase(const WorldState& world, const Signal& s);

}  // namespace drivelab
