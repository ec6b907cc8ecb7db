#include "drivelab/autopilot.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "drivelab/errors.hpp"

namespace drivelab {

namespace {

// Route ahead of a vehicle as a polyline starting at its position.
struct PathAhead {
  std::vector<Vec2> points;
  std::vector<double> along;  // distance from the vehicle along the path

  // Along-distance and lateral distance of p projected onto the path.
  std::pair<double, double> project(Vec2 p) const {
    double best_lat = INFINITY, best_along = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
      const double t = project_on_segment(p, points[i], points[i + 1]);
      const Vec2 q = points[i] + (points[i + 1] - points[i]) * t;
      const double lat = distance(p, q);
      if (lat < best_lat) {
        best_lat = lat;
        best_along = along[i] + t * (along[i + 1] - along[i]);
      }
    }
    return {best_along, best_lat};
  }
};

PathAhead build_path(const VehicleState& v, const Route& route, double horizon) {
  PathAhead path;
  path.points.push_back(v.pose.position);
  path.along.push_back(0.0);
  for (const Vec2& wp : route.ahead()) {
    const double d = distance(path.points.back(), wp);
    if (d < 1e-9) continue;
    path.points.push_back(wp);
    path.along.push_back(path.along.back() + d);
    if (path.along.back() > horizon) break;
  }
  return path;
}

double stop_speed(double distance, double decel) {
  return std::sqrt(2.0 * decel * std::max(0.0, distance));
}

}  // namespace

Control autopilot_control(const WorldState& world, ActorId id, const AutopilotConfig& cfg,
                          const AutopilotTuning& tuning) {
  const VehicleState& v = world.actor(id);
  auto rit = world.routes.find(id);
  if (rit == world.routes.end())
    throw SimulationError("autopilot actor " + std::to_string(id.value) + " has no route");
  const Route& route = rit->second;
  const DynamicsParams& dyn = world.dynamics;

  const PathAhead path = build_path(v, route, tuning.path_horizon);
  const double speed = v.speed;
  double desired = cfg.target_speed;
  Control out;

  if (path.points.size() < 2) {
    desired = 0.0;
  } else {
    // steering: pure pursuit on the first waypoint beyond the lookahead
    const double lookahead = std::max(tuning.min_lookahead, tuning.lookahead_time * std::abs(speed));
    Vec2 target = path.points.back();
    for (std::size_t i = 1; i < path.points.size(); ++i) {
      if (distance(v.pose.position, path.points[i]) >= lookahead) {
        target = path.points[i];
        break;
      }
    }
    const Vec2 local = rotate(target - v.pose.position, -v.pose.heading);
    const double ld = norm(local);
    if (ld > 1e-6) {
      const double alpha = std::atan2(local.y, local.x);
      const double delta = std::atan2(2.0 * v.wheelbase(dyn) * std::sin(alpha), ld);
      out.steer_cmd = std::clamp(delta / dyn.max_steer, -1.0, 1.0);
    }

    // curve speed limit, anticipated with the comfort deceleration
    for (std::size_t i = 1; i + 1 < path.points.size(); ++i) {
      const Vec2 a = path.points[i] - path.points[i - 1];
      const Vec2 b = path.points[i + 1] - path.points[i];
      const double turn = std::abs(std::atan2(cross(a, b), dot(a, b)));
      const double seg = 0.5 * (norm(a) + norm(b));
      if (turn < 1e-6 || seg < 1e-6) continue;
      const double kappa = turn / seg;
      const double v_curve = std::sqrt(tuning.lateral_accel / kappa);
      const double reach = std::sqrt(v_curve * v_curve + 2.0 * tuning.comfort_decel * path.along[i]);
      desired = std::min(desired, reach);
    }

    // come to rest at the end of a finite route
    if (path.along.back() < tuning.path_horizon)
      desired = std::min(desired, stop_speed(path.along.back(), tuning.comfort_decel));

    if (cfg.aggression == Aggression::lawful) {
      const double sim_t = world.sim_time();
      for (const Signal& sig : world.map->signals()) {
        const bool must_stop =
            sig.kind == SignalKind::stop_sign
                ? !world.stops_completed.contains({id, sig.id})
                : sig.phase_at(sim_t) != SignalPhase::green;
        if (!must_stop) continue;
        const auto [d_sig, lat] = path.project(sig.position);
        if (lat > tuning.signal_match || d_sig <= 0.0 || d_sig > cfg.headway_distance) continue;
        const double d_stop = d_sig - tuning.stop_margin;
        if (sig.kind == SignalKind::traffic_light && sig.phase_at(sim_t) == SignalPhase::yellow) {
          // commit through a yellow we cannot stop for
          const double brake_dist = speed * speed / (2.0 * dyn.max_accel);
          if (d_stop < brake_dist) continue;
        }
        desired = std::min(desired, stop_speed(d_stop, tuning.comfort_decel));
      }

      for (const auto& [oid, other] : world.actors) {
        if (oid == id) continue;
        const auto [d_o, lat] = path.project(other.pose.position);
        if (d_o <= 0.0 || d_o >= path.along.back()) continue;
        if (lat > 0.5 * (v.width + other.width) + 0.3) continue;
        const double gap = d_o - 0.5 * (v.length + other.length);
        if (gap > cfg.headway_distance) continue;
        const double lead_speed = std::max(0.0, other.speed * std::cos(other.pose.heading - v.pose.heading));
        desired = std::min(desired, std::min(lead_speed, cfg.target_speed) +
                                        stop_speed(gap - tuning.follow_gap, tuning.comfort_decel));
        if (gap <= tuning.follow_gap) desired = 0.0;
      }
    }
  }

  double throttle = std::clamp(tuning.speed_gain * (desired - speed), -1.0, 1.0);
  // brake to rest without rolling backwards
  const double per_step = dyn.max_accel * dyn.dt;
  if (speed >= 0.0) throttle = std::max(throttle, -speed / per_step);
  out.throttle = std::clamp(throttle, -1.0, 1.0);
  return out;
}

}  // namespace drivelab
