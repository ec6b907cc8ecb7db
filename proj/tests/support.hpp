#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "drivelab/road_map.hpp"
#include "drivelab/world.hpp"

namespace drivelab::testing {

inline nlohmann::json lane_json(const std::string& id, std::vector<Vec2> pts, double width = 3.5,
                                std::vector<std::string> successors = {}) {
  nlohmann::json line = nlohmann::json::array();
  for (const Vec2& p : pts) line.push_back({p.x, p.y});
  return {{"id", id}, {"width", width}, {"centerline", line}, {"successors", successors},
          {"left", nullptr}, {"right", nullptr}};
}

inline std::shared_ptr<const RoadMap> map_from(const nlohmann::json& doc) {
  return std::make_shared<const RoadMap>(load_map(doc.dump()));
}

// One straight lane along +x from the origin.
inline std::shared_ptr<const RoadMap> straight_map(double length = 100.0, double width = 3.5) {
  return map_from({{"lanes", {lane_json("L0", {{0, 0}, {length, 0}}, width)}}, {"signals", nlohmann::json::array()}});
}

inline VehicleState vehicle(ActorId id, Vec2 p, double heading, double speed = 0.0) {
  VehicleState v;
  v.id = id;
  v.pose = {p, heading};
  v.speed = speed;
  return v;
}

// Places an actor directly, bypassing spawn checks.
inline ActorId put(WorldState& w, Vec2 p, double heading, double speed = 0.0, double length = 4.5,
                   double width = 2.0) {
  const ActorId id{w.next_id++};
  VehicleState v = vehicle(id, p, heading, speed);
  v.length = length;
  v.width = width;
  w.actors[id] = v;
  return id;
}

}  // namespace drivelab::testing
