#include "drivelab/planning.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

#include "drivelab/errors.hpp"

namespace drivelab {

std::string planner_name(const PlannerKind& kind) {
  switch (kind.index()) {
    case 0: return "random_roam";
    case 1: return "fixed_path";
    default: return "fixed_ending";
  }
}

double project_onto_lane(const Lane& lane, Vec2 p) {
  double best_d = INFINITY, best_s = 0.0;
  for (std::size_t k = 0; k + 1 < lane.centerline.size(); ++k) {
    const Vec2 a = lane.centerline[k], b = lane.centerline[k + 1];
    const double t = project_on_segment(p, a, b);
    const double d = distance(p, a + (b - a) * t);
    if (d < best_d) {
      best_d = d;
      best_s = lane.stations[k] + t * (lane.stations[k + 1] - lane.stations[k]);
    }
  }
  return best_s;
}

std::vector<double> lane_samples(const Lane& lane, double resolution) {
  std::vector<double> out;
  const double len = lane.length();
  for (std::size_t k = 0;; ++k) {
    const double s = static_cast<double>(k) * resolution;
    if (s >= len - 1e-9) break;
    out.push_back(s);
  }
  out.push_back(len);
  return out;
}

namespace {

// Appends the lane geometry strictly after s_from up to and including s_to.
void append_lane_span(const Lane& lane, double s_from, double s_to, std::vector<Vec2>& out) {
  for (std::size_t k = 0; k < lane.centerline.size(); ++k) {
    if (lane.stations[k] > s_from + 1e-9 && lane.stations[k] < s_to - 1e-9) out.push_back(lane.centerline[k]);
  }
  out.push_back(lane.point_at(s_to));
}

LaneQuery on_road(const RoadMap& map, Vec2 p, const char* what) {
  if (map.empty()) throw PlanningError("planning on an empty map");
  LaneQuery q = map.lane_query(p);
  if (q.distance() > map.lanes()[q.lane_index].width)
    throw PlanningError(std::string(what) + " does not project onto any lane");
  return q;
}

}  // namespace

AStarResult a_star_route(const RoadMap& map, Vec2 start, Vec2 goal, const AStarOptions& options) {
  const LaneQuery qs = on_road(map, start, "start");
  const LaneQuery qg = on_road(map, goal, "goal");
  const auto& lanes = map.lanes();

  std::vector<std::vector<double>> samples(lanes.size());
  std::vector<std::size_t> base(lanes.size() + 1, 0);
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    samples[i] = lane_samples(lanes[i], options.resolution);
    base[i + 1] = base[i] + samples[i].size();
  }
  const std::size_t start_node = base.back();
  const std::size_t goal_node = start_node + 1;
  const std::size_t n_nodes = goal_node + 1;

  struct Key {
    std::size_t lane;
    double s;
  };
  std::vector<Key> key(n_nodes);
  for (std::size_t i = 0; i < lanes.size(); ++i)
    for (std::size_t k = 0; k < samples[i].size(); ++k) key[base[i] + k] = {i, samples[i][k]};
  key[start_node] = {qs.lane_index, qs.s};
  key[goal_node] = {qg.lane_index, qg.s};

  auto position = [&](std::size_t n) { return lanes[key[n].lane].point_at(key[n].s); };
  const Vec2 goal_pos = position(goal_node);
  auto heuristic = [&](std::size_t n) { return options.use_heuristic ? distance(position(n), goal_pos) : 0.0; };

  auto for_each_edge = [&](std::size_t n, auto&& visit) {
    if (n == goal_node) return;
    if (n == start_node) {
      const auto& smp = samples[qs.lane_index];
      const auto it = std::lower_bound(smp.begin(), smp.end(), qs.s);
      const std::size_t k = static_cast<std::size_t>(it - smp.begin());
      visit(base[qs.lane_index] + k, smp[k] - qs.s);
      if (qs.lane_index == qg.lane_index && qg.s >= qs.s) visit(goal_node, qg.s - qs.s);
      return;
    }
    const std::size_t i = key[n].lane;
    const std::size_t k = n - base[i];
    const auto& smp = samples[i];
    const Lane& lane = lanes[i];
    const bool last = k + 1 == smp.size();
    if (!last) visit(n + 1, smp[k + 1] - smp[k]);
    if (i == qg.lane_index && smp[k] <= qg.s && (last || smp[k + 1] > qg.s)) visit(goal_node, qg.s - smp[k]);
    if (last) {
      for (const auto& succ_id : lane.successors) {
        const std::size_t j = *map.lane_index(succ_id);
        visit(base[j], distance(lane.centerline.back(), lanes[j].centerline.front()));
      }
    }
    const Vec2 here = lane.point_at(smp[k]);
    for (const auto& nb : {lane.left, lane.right}) {
      if (!nb) continue;
      const std::size_t j = *map.lane_index(*nb);
      const Lane& other = lanes[j];
      const double target = project_onto_lane(other, here) + options.lane_change_length;
      if (target > other.length()) continue;
      const auto& osmp = samples[j];
      std::size_t m = static_cast<std::size_t>(std::lround(target / options.resolution));
      m = std::min(m, osmp.size() - 1);
      visit(base[j] + m, distance(here, other.point_at(osmp[m])));
    }
  };

  std::vector<double> g(n_nodes, INFINITY);
  std::vector<std::size_t> parent(n_nodes, n_nodes);
  std::vector<char> closed(n_nodes, 0);
  // (f, lane index, s, node) -- lane index order equals lane id order
  using Entry = std::tuple<double, std::size_t, double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  g[start_node] = 0.0;
  open.emplace(heuristic(start_node), key[start_node].lane, key[start_node].s, start_node);

  AStarResult result;
  while (!open.empty()) {
    const auto [f, lane_idx, s, n] = open.top();
    open.pop();
    if (closed[n]) continue;
    closed[n] = 1;
    if (options.record_expansions)
      result.expansions.push_back({lanes[key[n].lane].id, key[n].s, heuristic(n), g[n]});
    if (n == goal_node) break;
    for_each_edge(n, [&](std::size_t m, double cost) {
      if (closed[m]) return;
      const double cand = g[n] + cost;
      if (cand < g[m]) {
        g[m] = cand;
        parent[m] = n;
        open.emplace(cand + heuristic(m), key[m].lane, key[m].s, m);
      }
    });
  }
  if (!closed[goal_node])
    throw PlanningError("no route from (" + std::to_string(start.x) + ", " + std::to_string(start.y) + ") to (" +
                        std::to_string(goal.x) + ", " + std::to_string(goal.y) + ")");

  std::vector<std::size_t> chain;
  for (std::size_t n = goal_node; n != n_nodes; n = parent[n]) chain.push_back(n);
  std::reverse(chain.begin(), chain.end());

  result.cost = g[goal_node];
  result.polyline.push_back(position(chain.front()));
  for (std::size_t idx = 0; idx < chain.size(); ++idx) {
    const std::size_t n = chain[idx];
    result.path.push_back({lanes[key[n].lane].id, key[n].s, heuristic(n), g[n]});
    if (idx == 0) continue;
    const std::size_t prev = chain[idx - 1];
    if (key[prev].lane == key[n].lane && key[n].s >= key[prev].s) {
      append_lane_span(lanes[key[n].lane], key[prev].s, key[n].s, result.polyline);
    } else {
      result.polyline.push_back(position(n));
    }
  }
  result.route.waypoints = resample_polyline(result.polyline);
  return result;
}

namespace {

class RandomRoamPlanner final : public RoutePlanner {
 public:
  Route init_route(const RoadMap& map, const VehicleState& ego, Rng& rng) override {
    const LaneQuery q = on_road(map, ego.pose.position, "ego");
    Route route;
    route.end_lane = q.lane_id;
    route.end_s = q.s;
    route.waypoints.push_back(map.lane(q.lane_id).point_at(q.s));
    grow(map, route, rng);
    return route;
  }

  std::size_t extend_route(const RoadMap& map, const VehicleState& ego, Route& route, Rng& rng) override {
    const std::size_t passed = route.advance(ego.pose.position);
    grow(map, route, rng);
    return passed;
  }

 private:
  static constexpr double kChunk = 10.0;

  static void grow(const RoadMap& map, Route& route, Rng& rng) {
    while (route.remaining() < kRoamMinAhead) {
      if (!append_chunk(map, route, rng)) break;
    }
  }

  // Follows the lane graph from the route end for about kChunk meters,
  // picking a uniformly random successor at each branch.
  static bool append_chunk(const RoadMap& map, Route& route, Rng& rng) {
    std::vector<Vec2> poly{route.waypoints.back()};
    double acc = 0.0;
    const Lane* lane = &map.lane(route.end_lane);
    double s = route.end_s;
    while (acc < kChunk - 1e-6) {
      if (s >= lane->length() - 1e-9) {
        if (lane->successors.empty()) break;
        lane = &map.lane(lane->successors[rng.index(lane->successors.size())]);
        s = 0.0;
        if (distance(poly.back(), lane->centerline.front()) > 1e-9) poly.push_back(lane->centerline.front());
        continue;
      }
      const double to = std::min(lane->length(), s + (kChunk - acc));
      append_lane_span(*lane, s, to, poly);
      acc += to - s;
      s = to;
    }
    route.end_lane = lane->id;
    route.end_s = s;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) total += distance(poly[i], poly[i + 1]);
    if (total < 0.5) return false;
    auto pts = resample_polyline(poly);
    route.waypoints.insert(route.waypoints.end(), pts.begin() + 1, pts.end());
    return true;
  }
};

class FixedPathPlanner final : public RoutePlanner {
 public:
  explicit FixedPathPlanner(std::vector<Vec2> points) : points_(std::move(points)) {}

  Route init_route(const RoadMap& map, const VehicleState&, Rng&) override {
    if (points_.size() < 2) throw PlanningError("fixed path needs at least 2 points");
    std::vector<Vec2> poly;
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
      const AStarResult leg = a_star_route(map, points_[i], points_[i + 1]);
      poly.insert(poly.end(), leg.polyline.begin() + (poly.empty() ? 0 : 1), leg.polyline.end());
    }
    Route route;
    route.waypoints = resample_polyline(poly);
    return route;
  }

  std::size_t extend_route(const RoadMap&, const VehicleState& ego, Route& route, Rng&) override {
    return route.advance(ego.pose.position);
  }

 private:
  std::vector<Vec2> points_;
};

class FixedEndingPlanner final : public RoutePlanner {
 public:
  explicit FixedEndingPlanner(Vec2 goal) : goal_(goal) {}

  Route init_route(const RoadMap& map, const VehicleState& ego, Rng&) override {
    return a_star_route(map, ego.pose.position, goal_).route;
  }

  std::size_t extend_route(const RoadMap&, const VehicleState& ego, Route& route, Rng&) override {
    return route.advance(ego.pose.position);
  }

 private:
  Vec2 goal_;
};

}  // namespace

std::unique_ptr<RoutePlanner> make_planner(const PlannerKind& kind) {
  return std::visit(
      [](const auto& k) -> std::unique_ptr<RoutePlanner> {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, RandomRoam>) {
          return std::make_unique<RandomRoamPlanner>();
        } else if constexpr (std::is_same_v<K, FixedPath>) {
          return std::make_unique<FixedPathPlanner>(k.points);
        } else {
          return std::make_unique<FixedEndingPlanner>(k.goal);
        }
      },
      kind);
}

Route init_route(const PlannerKind& kind, const RoadMap& map, const VehicleState& ego, Rng& rng) {
  return make_planner(kind)->init_route(map, ego, rng);
}

std::size_t extend_route(const PlannerKind& kind, const RoadMap& map, const VehicleState& ego, Route& route,
                         Rng& rng) {
  return make_planner(kind)->extend_route(map, ego, route, rng);
}

}  // namespace drivelab
