#include "drivelab/observer.hpp"

#include <algorithm>
#include <cmath>

#include "drivelab/errors.hpp"

namespace drivelab {

const Payload* ObservationBundle::find(std::string_view name) const {
  for (const auto& [n, p] : entries)
    if (n == name) return &p;
  return nullptr;
}

const Payload& ObservationBundle::at(std::string_view name) const {
  const Payload* p = find(name);
  if (!p) throw Error("observation has no entry '" + std::string(name) + "'");
  return *p;
}

std::vector<std::string> ObservationBundle::names() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : entries) out.push_back(n);
  return out;
}

Observer& Observer::register_handler(std::string name, DataHandler handler) {
  if (has_handler(name)) throw ConfigError("data handler '" + name + "' already registered");
  handlers_.emplace_back(std::move(name), std::move(handler));
  return *this;
}

bool Observer::has_handler(std::string_view name) const {
  return std::any_of(handlers_.begin(), handlers_.end(), [&](const auto& h) { return h.first == name; });
}

std::vector<std::string> Observer::handler_names() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : handlers_) out.push_back(n);
  return out;
}

ObservationBundle Observer::collect(const WorldState& world, ActorId ego, const VisibilityConfig& vcfg,
                                    const IntentionConfig& icfg) const {
  const std::set<ActorId> visible = visible_set(world, ego, vcfg);
  const Intentions intentions = collect_intentions(world, ego, icfg, world.routes, visible);
  const HandlerInput input{world, ego, visible, intentions};
  ObservationBundle bundle;
  for (const auto& [name, handler] : handlers_) {
    try {
      bundle.entries.emplace_back(name, handler(input));
    } catch (const std::exception& e) {
      throw Error("data handler '" + name + "': " + e.what());
    }
  }
  return bundle;
}

bool in_fov(const VehicleState& viewer, const VehicleState& target, const VisibilityConfig& cfg) {
  const Vec2 d = target.pose.position - viewer.pose.position;
  const double dist = norm(d);
  if (dist > cfg.range) return false;
  if (dist == 0.0) return true;
  const double bearing = normalize_angle(std::atan2(d.y, d.x) - viewer.pose.heading);
  return std::abs(bearing) <= cfg.cone_half_angle;
}

namespace {

std::set<ActorId> fov_of(const WorldState& world, const VehicleState& viewer, const VisibilityConfig& cfg) {
  std::set<ActorId> out{viewer.id};
  for (const auto& [id, other] : world.actors)
    if (id != viewer.id && in_fov(viewer, other, cfg)) out.insert(id);
  return out;
}

}  // namespace

std::set<ActorId> visible_set(const WorldState& world, ActorId ego, const VisibilityConfig& cfg) {
  const VehicleState& e = world.actor(ego);
  if (cfg.mode == VisibilityMode::full) {
    std::set<ActorId> all;
    for (const auto& [id, _] : world.actors) all.insert(id);
    return all;
  }
  std::set<ActorId> out = fov_of(world, e, cfg);
  if (cfg.mode == VisibilityMode::sfov) {
    const std::set<ActorId> first = out;
    for (ActorId u : first) {
      if (u == ego) continue;
      const auto second = fov_of(world, world.actor(u), cfg);
      out.insert(second.begin(), second.end());
    }
  }
  return out;
}

Intentions collect_intentions(const WorldState& world, ActorId ego, const IntentionConfig& icfg,
                              const std::map<ActorId, Route>& routes, const std::set<ActorId>& visible) {
  Intentions out;
  if (!icfg.enabled) return out;
  for (const auto& [id, _] : world.actors) {
    if (id == ego) continue;
    if (icfg.scope == IntentionScope::visible_only && !visible.contains(id)) continue;
    auto it = routes.find(id);
    if (it == routes.end()) continue;
    const auto ahead = it->second.ahead();
    const std::size_t n = std::min(icfg.shared_waypoints, ahead.size());
    out[id] = std::vector<Vec2>(ahead.begin(), ahead.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return out;
}

Vec2 bev_pixel_center(const BevSpec& spec, int row, int col) {
  return {(spec.anchor_row() - row - 0.5) * spec.resolution, (spec.anchor_col() - col - 0.5) * spec.resolution};
}

namespace {

// Rasterizes into the ego frame by visiting only the pixels whose centers
// fall in an ego-frame bounding box.
class Raster {
 public:
  Raster(const BevSpec& spec, const Pose& ego) : spec_(spec), ego_(ego), img_(spec.size, spec.size, spec.palette.background) {
    c_ = std::cos(-ego.heading);
    s_ = std::sin(-ego.heading);
  }

  Vec2 to_local(Vec2 world) const { return rotate(world - ego_.position, c_, s_); }

  template <class Inside>
  void fill(Vec2 lo, Vec2 hi, std::uint8_t value, Inside&& inside) {
    const double res = spec_.resolution;
    // x forward -> row decreases; y left -> col decreases
    const int r0 = std::max(0, static_cast<int>(std::floor(spec_.anchor_row() - 0.5 - hi.x / res)));
    const int r1 = std::min(spec_.size - 1, static_cast<int>(std::ceil(spec_.anchor_row() - 0.5 - lo.x / res)));
    const int c0 = std::max(0, static_cast<int>(std::floor(spec_.anchor_col() - 0.5 - hi.y / res)));
    const int c1 = std::min(spec_.size - 1, static_cast<int>(std::ceil(spec_.anchor_col() - 0.5 - lo.y / res)));
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c)
        if (inside(bev_pixel_center(spec_, r, c))) img_.at(r, c) = value;
  }

  void capsule(Vec2 a_world, Vec2 b_world, double radius, std::uint8_t value) {
    const Vec2 a = to_local(a_world), b = to_local(b_world);
    const Vec2 lo{std::min(a.x, b.x) - radius, std::min(a.y, b.y) - radius};
    const Vec2 hi{std::max(a.x, b.x) + radius, std::max(a.y, b.y) + radius};
    if (!overlaps_view(lo, hi)) return;
    fill(lo, hi, value, [&](Vec2 p) { return point_segment_distance(p, a, b) <= radius; });
  }

  void disc(Vec2 c_world, double radius, std::uint8_t value) { capsule(c_world, c_world, radius, value); }

  void rect(const OrientedRect& r_world, std::uint8_t value) {
    OrientedRect r = r_world;
    r.center = to_local(r_world.center);
    r.heading = r_world.heading - ego_.heading;
    Vec2 lo{INFINITY, INFINITY}, hi{-INFINITY, -INFINITY};
    for (const Vec2& k : r.corners()) {
      lo = {std::min(lo.x, k.x), std::min(lo.y, k.y)};
      hi = {std::max(hi.x, k.x), std::max(hi.y, k.y)};
    }
    if (!overlaps_view(lo, hi)) return;
    fill(lo, hi, value, [&](Vec2 p) { return point_in_rect(p, r); });
  }

  Image take() { return std::move(img_); }

 private:
  bool overlaps_view(Vec2 lo, Vec2 hi) const {
    const double res = spec_.resolution;
    const double top = spec_.anchor_row() * res, bottom = -(spec_.size - spec_.anchor_row()) * res;
    const double left = spec_.anchor_col() * res, right = -(spec_.size - spec_.anchor_col()) * res;
    return hi.x >= bottom && lo.x <= top && hi.y >= right && lo.y <= left;
  }

  const BevSpec& spec_;
  Pose ego_;
  double c_ = 1.0, s_ = 0.0;
  Image img_;
};

constexpr double kSignalRadius = 1.0;
constexpr double kWaypointRadius = 0.4;

}  // namespace

Image render_bev(const WorldState& world, ActorId ego, const BevSpec& spec, const std::set<ActorId>& visible,
                 const Intentions& intentions) {
  const VehicleState& e = world.actor(ego);
  Raster raster(spec, e.pose);
  const Palette& pal = spec.palette;

  if (world.map) {
    for (const Lane& lane : world.map->lanes())
      for (std::size_t k = 0; k + 1 < lane.centerline.size(); ++k)
        raster.capsule(lane.centerline[k], lane.centerline[k + 1], lane.width / 2.0, pal.road);
    for (const Signal& sig : world.map->signals()) {
      const bool go = sig.kind == SignalKind::traffic_light && signal_phase(world, sig) == SignalPhase::green;
      raster.disc(sig.position, kSignalRadius, go ? pal.signal_green : pal.signal_red);
    }
  }
  if (auto it = world.routes.find(ego); it != world.routes.end())
    for (const Vec2& wp : it->second.ahead()) raster.disc(wp, kWaypointRadius, pal.route_waypoint);
  for (const auto& [id, wps] : intentions)
    for (const Vec2& wp : wps) raster.disc(wp, kWaypointRadius, pal.intention_waypoint);
  for (const auto& [id, v] : world.actors)
    if (id != ego && visible.contains(id)) raster.rect(v.footprint(), pal.other_vehicle);
  raster.rect(e.footprint(), pal.ego);
  return raster.take();
}

std::vector<double> lidar_scan(const WorldState& world, ActorId ego, const LidarSpec& spec) {
  const VehicleState& e = world.actor(ego);
  const Vec2 origin = e.pose.position;

  struct Capsule {
    Vec2 a, b;
    double radius;
  };
  std::vector<Capsule> road;
  if (world.map) {
    for (const Lane& lane : world.map->lanes())
      for (std::size_t k = 0; k + 1 < lane.centerline.size(); ++k) {
        const Vec2 a = lane.centerline[k], b = lane.centerline[k + 1];
        if (point_segment_distance(origin, a, b) <= spec.max_range + lane.width / 2.0)
          road.push_back({a, b, lane.width / 2.0});
      }
  }
  std::vector<OrientedRect> others;
  for (const auto& [id, v] : world.actors)
    if (id != ego) others.push_back(v.footprint());

  std::vector<double> ranges(static_cast<std::size_t>(spec.beams), spec.max_range);
  std::vector<RayInterval> spans;
  for (int i = 0; i < spec.beams; ++i) {
    const double angle = e.pose.heading + 2.0 * std::numbers::pi * i / spec.beams;
    const Vec2 dir = unit_from_angle(angle);
    double best = spec.max_range;

    for (const OrientedRect& r : others) {
      const auto hit = ray_rect_interval(origin, dir, r);
      if (!hit || hit->exit < 0.0) continue;
      best = std::min(best, std::max(0.0, hit->enter));
    }

    // road boundary = boundary of the union of lane capsules along the ray
    spans.clear();
    for (const Capsule& c : road) {
      const auto hit = ray_capsule_interval(origin, dir, c.a, c.b, c.radius);
      if (hit && hit->exit >= 0.0) spans.push_back(*hit);
    }
    std::sort(spans.begin(), spans.end(), [](const RayInterval& x, const RayInterval& y) {
      return x.enter < y.enter || (x.enter == y.enter && x.exit < y.exit);
    });
    std::size_t j = 0;
    while (j < spans.size()) {
      double lo = spans[j].enter, hi = spans[j].exit;
      for (++j; j < spans.size() && spans[j].enter <= hi + kTouchTolerance; ++j) hi = std::max(hi, spans[j].exit);
      if (lo > 0.0) {
        best = std::min(best, lo);
        break;
      }
      if (hi >= 0.0) {
        best = std::min(best, hi);
        break;
      }
    }
    ranges[static_cast<std::size_t>(i)] = best;
  }
  return ranges;
}

namespace {

std::vector<ActorId> ordered_rows(const WorldState& world, ActorId ego, auto&& include) {
  const Vec2 p = world.actor(ego).pose.position;
  std::vector<std::pair<double, ActorId>> others;
  for (const auto& [id, v] : world.actors)
    if (id != ego && include(id)) others.emplace_back(distance(p, v.pose.position), id);
  std::sort(others.begin(), others.end());
  std::vector<ActorId> out;
  for (const auto& [_, id] : others) out.push_back(id);
  return out;
}

}  // namespace

std::vector<double> state_vector(const WorldState& world, ActorId ego, const std::set<ActorId>& visible) {
  const VehicleState& e = world.actor(ego);
  std::vector<double> out(kStateVectorRows * 4, 0.0);
  std::vector<ActorId> rows{ego};
  for (ActorId id : ordered_rows(world, ego, [&](ActorId id) { return visible.contains(id); })) rows.push_back(id);
  for (std::size_t r = 0; r < rows.size() && r < kStateVectorRows; ++r) {
    const VehicleState& v = world.actor(rows[r]);
    const Vec2 rel = rotate(v.pose.position - e.pose.position, -e.pose.heading);
    out[r * 4 + 0] = rel.x;
    out[r * 4 + 1] = rel.y;
    out[r * 4 + 2] = normalize_angle(v.pose.heading - e.pose.heading);
    out[r * 4 + 3] = v.speed;
  }
  return out;
}

std::vector<double> intention_vector(const WorldState& world, ActorId ego, const Intentions& intentions,
                                     std::size_t k) {
  const VehicleState& e = world.actor(ego);
  const std::size_t block = k * 2;
  std::vector<double> out((kStateVectorRows - 1) * block, 0.0);
  const auto rows = ordered_rows(world, ego, [&](ActorId id) { return intentions.contains(id); });
  for (std::size_t r = 0; r < rows.size() && r + 1 < kStateVectorRows; ++r) {
    const auto& wps = intentions.at(rows[r]);
    for (std::size_t w = 0; w < wps.size() && w < k; ++w) {
      const Vec2 rel = rotate(wps[w] - e.pose.position, -e.pose.heading);
      out[r * block + w * 2] = rel.x;
      out[r * block + w * 2 + 1] = rel.y;
    }
  }
  return out;
}

const std::vector<std::string>& builtin_handler_names() {
  static const std::vector<std::string> names{"bev", "lidar", "state_vector", "intentions"};
  return names;
}

DataHandler make_builtin_handler(std::string_view name, const BevSpec& bev, const LidarSpec& lidar,
                                 const IntentionConfig& icfg) {
  if (name == "bev")
    return [bev](const HandlerInput& in) -> Payload {
      return render_bev(in.world, in.ego, bev, in.visible, in.intentions);
    };
  if (name == "lidar")
    return [lidar](const HandlerInput& in) -> Payload { return lidar_scan(in.world, in.ego, lidar); };
  if (name == "state_vector")
    return [](const HandlerInput& in) -> Payload { return state_vector(in.world, in.ego, in.visible); };
  if (name == "intentions") {
    const std::size_t k = icfg.shared_waypoints;
    return [k](const HandlerInput& in) -> Payload { return intention_vector(in.world, in.ego, in.intentions, k); };
  }
  throw ConfigError("unknown data handler '" + std::string(name) + "'");
}

}  // namespace drivelab
