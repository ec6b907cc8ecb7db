#include "drivelab/world.hpp"

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>

#include "drivelab/autopilot.hpp"
#include "drivelab/errors.hpp"

namespace drivelab {

const VehicleState& WorldState::actor(ActorId id) const {
  auto it = actors.find(id);
  if (it == actors.end()) throw SimulationError("unknown actor id " + std::to_string(id.value));
  return it->second;
}

VehicleState& WorldState::actor(ActorId id) {
  auto it = actors.find(id);
  if (it == actors.end()) throw SimulationError("unknown actor id " + std::to_string(id.value));
  return it->second;
}

WorldState make_world(std::shared_ptr<const RoadMap> map, std::uint64_t seed, DynamicsParams dynamics) {
  WorldState w;
  w.map = std::move(map);
  w.dynamics = dynamics;
  destroy_all(w, seed);
  return w;
}

bool footprint_free(const WorldState& world, const OrientedRect& rect) {
  return std::none_of(world.actors.begin(), world.actors.end(),
                      [&](const auto& kv) { return obb_overlap(kv.second.footprint(), rect); });
}

ActorId spawn_vehicle(WorldState& world, const SpawnSpec& spec) {
  const Lane* lane = world.map->find_lane(spec.lane);
  if (!lane) throw SimulationError("spawn on unknown lane '" + spec.lane + "'");
  if (!(spec.offset >= 0.0 && spec.offset <= lane->length()))
    throw SimulationError("spawn offset " + std::to_string(spec.offset) + " outside lane '" +
                          spec.lane + "' (length " + std::to_string(lane->length()) + ")");
  if (!(spec.blueprint.length > spec.blueprint.width && spec.blueprint.width > 0.0))
    throw SimulationError("blueprint needs length > width > 0");

  VehicleState v;
  v.pose.position = lane->point_at(spec.offset);
  const Vec2 t = lane->tangent_at(spec.offset);
  v.pose.heading = normalize_angle(std::atan2(t.y, t.x));
  v.speed = std::clamp(spec.speed, world.dynamics.min_speed, world.dynamics.max_speed);
  v.length = spec.blueprint.length;
  v.width = spec.blueprint.width;
  v.role = spec.role;
  v.controller = spec.controller;
  if (spec.controller == Controller::autopilot) v.autopilot = spec.autopilot.value_or(AutopilotConfig{});

  if (!footprint_free(world, v.footprint()))
    throw SimulationError("spawn on lane '" + spec.lane + "' at offset " + std::to_string(spec.offset) +
                          " overlaps an existing actor");
  v.id = ActorId{world.next_id++};
  world.actors.emplace(v.id, v);
  return v.id;
}

void destroy_actor(WorldState& world, ActorId id) {
  world.actors.erase(id);
  world.routes.erase(id);
  std::erase_if(world.stops_completed, [id](const auto& p) { return p.first == id; });
}

void destroy_all(WorldState& world, std::uint64_t seed) {
  world.actors.clear();
  world.routes.clear();
  world.stops_completed.clear();
  world.tick = 0;
  world.seed = seed;
  world.rng.reseed(seed);
  world.next_id = 1;
  update_signals(world);
}

void integrate(VehicleState& v, Control c, const DynamicsParams& p) {
  const double throttle = std::clamp(c.throttle, -1.0, 1.0);
  const double steer_cmd = std::clamp(c.steer_cmd, -1.0, 1.0);
  v.speed = std::clamp(v.speed + throttle * p.max_accel * p.dt, p.min_speed, p.max_speed);
  v.steer = steer_cmd * p.max_steer;
  const double heading = v.pose.heading + (v.speed / v.wheelbase(p)) * std::tan(v.steer) * p.dt;
  v.pose.position = v.pose.position + Vec2{std::cos(heading), std::sin(heading)} * (v.speed * p.dt);
  v.pose.heading = normalize_angle(heading);
  v.odometer += std::abs(v.speed) * p.dt;
}

void update_signals(WorldState& world) {
  world.signal_states.clear();
  if (!world.map) return;
  const double t = world.sim_time();
  for (const Signal& s : world.map->signals()) world.signal_states[s.id] = s.phase_at(t);
}

SignalPhase signal_phase(const WorldState& world, const Signal& s) {
  auto it = world.signal_states.find(s.id);
  return it != world.signal_states.end() ? it->second : s.phase_at(world.sim_time());
}

namespace {

constexpr double kStoppedSpeed = 0.1;
constexpr double kStopSignRadius = 3.0;

void record_stops(WorldState& world) {
  for (const Signal& sig : world.map->signals()) {
    if (sig.kind != SignalKind::stop_sign) continue;
    for (const auto& [id, v] : world.actors) {
      if (std::abs(v.speed) >= kStoppedSpeed) continue;
      if (distance(v.pose.position, sig.position) > kStopSignRadius) continue;
      if (world.map->lane_query(v.pose.position).lane_id != sig.lane) continue;
      world.stops_completed.insert({id, sig.id});
    }
  }
}

}  // namespace

void tick(WorldState& world, const Controls& controls) {
  if (!(world.dynamics.dt > 0.0)) throw SimulationError("dt must be positive");
  for (const auto& [id, _] : controls)
    if (!world.has_actor(id)) throw SimulationError("control for unknown actor id " + std::to_string(id.value));

  // all controls are computed from the pre-step state
  Controls applied;
  for (const auto& [id, v] : world.actors) {
    if (v.controller == Controller::autopilot) {
      applied[id] = autopilot_control(world, id, v.autopilot.value_or(AutopilotConfig{}));
    } else if (auto it = controls.find(id); it != controls.end()) {
      applied[id] = it->second;
    } else {
      applied[id] = Control{};
    }
  }
  for (auto& [id, v] : world.actors) integrate(v, applied[id], world.dynamics);
  ++world.tick;
  update_signals(world);
  record_stops(world);
}

std::vector<std::pair<ActorId, ActorId>> detect_collisions(const WorldState& world) {
  std::vector<std::pair<ActorId, ActorId>> out;
  for (auto a = world.actors.begin(); a != world.actors.end(); ++a) {
    const OrientedRect ra = a->second.footprint();
    const double reach_a = 0.5 * std::hypot(ra.length, ra.width);
    for (auto b = std::next(a); b != world.actors.end(); ++b) {
      const OrientedRect rb = b->second.footprint();
      const double reach_b = 0.5 * std::hypot(rb.length, rb.width);
      if (distance(ra.center, rb.center) > reach_a + reach_b + kTouchTolerance) continue;
      if (obb_overlap(ra, rb)) out.emplace_back(a->first, b->first);
    }
  }
  return out;
}

namespace {

void put_double(std::string& out, double v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, " %016" PRIx64, std::bit_cast<std::uint64_t>(v));
  out += buf;
}

}  // namespace

std::string canonical_state(const WorldState& w) {
  std::string out;
  out += "tick " + std::to_string(w.tick) + "\nseed " + std::to_string(w.seed) + "\nnext_id " +
         std::to_string(w.next_id) + "\nrng " + w.rng.state() + "\n";
  for (const auto& [id, v] : w.actors) {
    out += "actor " + std::to_string(id.value) + (v.role == Role::ego ? " ego" : " bg") +
           (v.controller == Controller::autopilot ? " auto" : " ext");
    for (double d : {v.pose.position.x, v.pose.position.y, v.pose.heading, v.speed, v.steer, v.length,
                     v.width, v.odometer})
      put_double(out, d);
    if (v.autopilot) {
      put_double(out, v.autopilot->target_speed);
      put_double(out, v.autopilot->headway_distance);
      out += v.autopilot->aggression == Aggression::lawful ? " lawful" : " aggressive";
    }
    out += "\n";
  }
  for (const auto& [id, r] : w.routes) {
    out += "route " + std::to_string(id.value) + " " + std::to_string(r.cursor) + " " +
           std::to_string(r.waypoints.size());
    put_double(out, r.reach_radius);
    out += " " + (r.end_lane.empty() ? std::string("-") : r.end_lane);
    put_double(out, r.end_s);
    for (const Vec2& p : r.waypoints) {
      put_double(out, p.x);
      put_double(out, p.y);
    }
    out += "\n";
  }
  for (const auto& [id, phase] : w.signal_states) out += "signal " + id + " " + std::string(to_string(phase)) + "\n";
  for (const auto& [id, sign] : w.stops_completed) out += "stopped " + std::to_string(id.value) + " " + sign + "\n";
  return out;
}

}  // namespace drivelab
