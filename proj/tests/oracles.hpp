#pragma once

// Brute-force reference implementations used by the unit tests and the
// acceptance runner. They deliberately share no code with the modules they
// check beyond the map loader and basic vector math.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "drivelab/rng.hpp"
#include "drivelab/road_map.hpp"
#include "drivelab/world.hpp"

namespace drivelab::oracle {

// ---------------------------------------------------------------------------
// lane graph shortest path

struct LanePoint {
  std::size_t lane;
  double s;
};

inline Vec2 point_on(const Lane& l, double s) {
  s = std::clamp(s, 0.0, l.length());
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < l.centerline.size(); ++k) {
    const Vec2 a = l.centerline[k], b = l.centerline[k + 1];
    const double len = distance(a, b);
    if (s <= acc + len || k + 2 == l.centerline.size()) {
      const double t = len > 0 ? (s - acc) / len : 0.0;
      return a + (b - a) * std::clamp(t, 0.0, 1.0);
    }
    acc += len;
  }
  return l.centerline.back();
}

inline double nearest_s(const Lane& l, Vec2 p) {
  double best = INFINITY, best_s = 0.0, acc = 0.0;
  for (std::size_t k = 0; k + 1 < l.centerline.size(); ++k) {
    const Vec2 a = l.centerline[k], b = l.centerline[k + 1];
    const Vec2 ab = b - a;
    const double len = norm(ab);
    double t = dot(p - a, ab) / (len * len);
    t = std::clamp(t, 0.0, 1.0);
    const double d = distance(p, a + ab * t);
    if (d < best) {
      best = d;
      best_s = acc + t * len;
    }
    acc += len;
  }
  return best_s;
}

/// Plain Dijkstra over (lane, s) samples at `res` meters plus lane ends,
/// with successor links (cost = endpoint gap) and lane changes to the
/// left/right neighbour landing `lane_change` meters ahead (cost = chord).
/// Start and goal are attached at their projections.
inline std::optional<double> dijkstra_cost(const RoadMap& map, Vec2 start, Vec2 goal, double res = 1.0,
                                           double lane_change = 8.0) {
  const auto& lanes = map.lanes();
  std::vector<std::vector<double>> st(lanes.size());
  std::vector<std::size_t> first(lanes.size());
  std::size_t n = 0;
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const double len = lanes[i].length();
    for (int k = 0; k * res < len - 1e-9; ++k) st[i].push_back(k * res);
    st[i].push_back(len);
    first[i] = n;
    n += st[i].size();
  }
  const std::size_t S = n, G = n + 1;
  n += 2;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < lanes.size(); ++i) index[lanes[i].id] = i;

  const LaneQuery qs = map.lane_query(start), qg = map.lane_query(goal);
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const Lane& l = lanes[i];
    for (std::size_t k = 0; k < st[i].size(); ++k) {
      const std::size_t u = first[i] + k;
      if (k + 1 < st[i].size()) adj[u].push_back({u + 1, st[i][k + 1] - st[i][k]});
      if (k + 1 == st[i].size())
        for (const auto& sid : l.successors) {
          const std::size_t j = index.at(sid);
          adj[u].push_back({first[j], distance(l.centerline.back(), lanes[j].centerline.front())});
        }
      if (i == qg.lane_index && st[i][k] <= qg.s && (k + 1 == st[i].size() || st[i][k + 1] > qg.s))
        adj[u].push_back({G, qg.s - st[i][k]});
      const Vec2 here = point_on(l, st[i][k]);
      for (const auto& nb : {l.left, l.right}) {
        if (!nb) continue;
        const std::size_t j = index.at(*nb);
        const double target = nearest_s(lanes[j], here) + lane_change;
        if (target > lanes[j].length()) continue;
        std::size_t m = static_cast<std::size_t>(std::lround(target / res));
        m = std::min(m, st[j].size() - 1);
        adj[u].push_back({first[j] + m, distance(here, point_on(lanes[j], st[j][m]))});
      }
    }
  }
  {
    const auto& smp = st[qs.lane_index];
    std::size_t k = 0;
    while (k < smp.size() && smp[k] < qs.s) ++k;
    adj[S].push_back({first[qs.lane_index] + k, smp[k] - qs.s});
    if (qs.lane_index == qg.lane_index && qg.s >= qs.s) adj[S].push_back({G, qg.s - qs.s});
  }

  std::vector<double> dist(n, INFINITY);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[S] = 0.0;
  pq.push({0.0, S});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (auto [v, w] : adj[u])
      if (d + w < dist[v]) {
        dist[v] = d + w;
        pq.push({dist[v], v});
      }
  }
  if (!std::isfinite(dist[G])) return std::nullopt;
  return dist[G];
}

/// Random lane graph: junction points joined by bent one-way lanes, some
/// with a parallel twin declared as left neighbour.
inline nlohmann::json random_lane_graph(Rng& rng, int max_lanes = 50) {
  const int junctions = 4 + static_cast<int>(rng.index(8));
  std::vector<Vec2> j;
  for (int i = 0; i < junctions; ++i) j.push_back({rng.uniform(0, 300), rng.uniform(0, 300)});
  struct L {
    std::string id;
    int from, to;
    std::vector<Vec2> pts;
    std::optional<std::string> left, right;
  };
  std::vector<L> lanes;
  const int target = 6 + static_cast<int>(rng.index(static_cast<std::size_t>(max_lanes - 12)));
  int guard = 0;
  while (static_cast<int>(lanes.size()) < target && guard++ < 1000) {
    const int a = static_cast<int>(rng.index(j.size()));
    const int b = static_cast<int>(rng.index(j.size()));
    if (a == b || distance(j[a], j[b]) < 20) continue;
    const Vec2 d = j[b] - j[a];
    const Vec2 nrm = Vec2{-d.y, d.x} * (1.0 / norm(d));
    const Vec2 mid = (j[a] + j[b]) * 0.5 + nrm * rng.uniform(-20, 20);
    L lane{"l" + std::to_string(lanes.size()), a, b, {j[a], mid, j[b]}, {}, {}};
    lanes.push_back(lane);
    if (rng.uniform() < 0.3 && static_cast<int>(lanes.size()) < max_lanes) {
      // twin shifted to the left, same endpoints' junction roles
      L twin{"l" + std::to_string(lanes.size()), a, b, {}, {}, {}};
      const Vec2 n0 = Vec2{-(mid - j[a]).y, (mid - j[a]).x} * (3.5 / norm(mid - j[a]));
      const Vec2 n1 = Vec2{-(j[b] - mid).y, (j[b] - mid).x} * (3.5 / norm(j[b] - mid));
      twin.pts = {j[a] + n0, mid + (n0 + n1) * 0.5, j[b] + n1};
      twin.right = lanes.back().id;
      lanes.back().left = twin.id;
      lanes.push_back(twin);
    }
  }
  nlohmann::json out = nlohmann::json::array();
  for (const L& l : lanes) {
    std::vector<std::string> succ;
    for (const L& m : lanes)
      if (m.from == l.to && m.id != l.id) succ.push_back(m.id);
    nlohmann::json line = nlohmann::json::array();
    for (const Vec2& p : l.pts) line.push_back({p.x, p.y});
    out.push_back({{"id", l.id},
                   {"width", 3.5},
                   {"centerline", line},
                   {"successors", succ},
                   {"left", l.left ? nlohmann::json(*l.left) : nlohmann::json(nullptr)},
                   {"right", l.right ? nlohmann::json(*l.right) : nlohmann::json(nullptr)}});
  }
  return {{"lanes", out}, {"signals", nlohmann::json::array()}};
}

// ---------------------------------------------------------------------------
// rectangle overlap by point sampling

struct Rect {
  double cx, cy, heading, length, width;
};

inline bool contains(const Rect& r, double x, double y) {
  const double c = std::cos(r.heading), s = std::sin(r.heading);
  const double dx = x - r.cx, dy = y - r.cy;
  return std::abs(c * dx + s * dy) <= r.length / 2 && std::abs(-s * dx + c * dy) <= r.width / 2;
}

/// Samples rectangle a on a `step` grid (plus its corners and edge points)
/// and reports whether any sample falls inside b, and vice versa.
inline bool sampled_overlap(const Rect& a, const Rect& b, double step = 0.01) {
  auto probe = [step](const Rect& p, const Rect& q) {
    const double c = std::cos(p.heading), s = std::sin(p.heading);
    const double qc = std::cos(q.heading), qs = std::sin(q.heading);
    auto inside = [&](double x, double y) {
      const double dx = x - q.cx, dy = y - q.cy;
      return std::abs(qc * dx + qs * dy) <= q.length / 2 && std::abs(-qs * dx + qc * dy) <= q.width / 2;
    };
    const int nu = static_cast<int>(std::ceil(p.length / step));
    const int nv = static_cast<int>(std::ceil(p.width / step));
    for (int i = 0; i <= nu; ++i) {
      const double u = -p.length / 2 + p.length * i / nu;
      for (int k = 0; k <= nv; ++k) {
        const double v = -p.width / 2 + p.width * k / nv;
        if (inside(p.cx + c * u - s * v, p.cy + s * u + c * v)) return true;
      }
    }
    return false;
  };
  return probe(a, b) || probe(b, a);
}

/// Exact distance between two rectangles when disjoint, via
/// corner-to-edge distances. Meaningless when they overlap.
inline double rect_gap(const Rect& a, const Rect& b) {
  auto corners = [](const Rect& r) {
    const double c = std::cos(r.heading), s = std::sin(r.heading);
    std::vector<Vec2> out;
    for (auto [u, v] : {std::pair{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}) {
      const double x = u * r.length / 2, y = v * r.width / 2;
      out.push_back({r.cx + c * x - s * y, r.cy + s * x + c * y});
    }
    return out;
  };
  const auto ca = corners(a), cb = corners(b);
  double best = INFINITY;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) {
      best = std::min(best, point_segment_distance(ca[i], cb[k], cb[(k + 1) % 4]));
      best = std::min(best, point_segment_distance(cb[i], ca[k], ca[(k + 1) % 4]));
    }
  return best;
}

/// Exact polygon test: a corner of one inside the other, or two edges
/// crossing.
inline bool exact_overlap(const Rect& a, const Rect& b) {
  auto corners = [](const Rect& r) {
    const double c = std::cos(r.heading), s = std::sin(r.heading);
    std::array<Vec2, 4> out;
    int i = 0;
    for (auto [u, v] : {std::pair{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}) {
      const double x = u * r.length / 2, y = v * r.width / 2;
      out[i++] = {r.cx + c * x - s * y, r.cy + s * x + c * y};
    }
    return out;
  };
  const auto ca = corners(a), cb = corners(b);
  for (const Vec2& p : ca)
    if (contains(b, p.x, p.y)) return true;
  for (const Vec2& p : cb)
    if (contains(a, p.x, p.y)) return true;
  auto orient = [](Vec2 p, Vec2 q, Vec2 r) { return cross(q - p, r - p); };
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) {
      const Vec2 p = ca[i], q = ca[(i + 1) % 4], r = cb[k], t = cb[(k + 1) % 4];
      if (orient(p, q, r) * orient(p, q, t) < 0 && orient(r, t, p) * orient(r, t, q) < 0) return true;
    }
  return false;
}

/// True when growing or shrinking both rectangles by `margin` on every
/// side flips the exact overlap verdict.
inline bool near_tangent(const Rect& a, const Rect& b, double margin) {
  auto resize = [](Rect r, double d) {
    r.length += 2 * d;
    r.width += 2 * d;
    return r;
  };
  return exact_overlap(resize(a, margin), resize(b, margin)) != exact_overlap(resize(a, -margin), resize(b, -margin));
}

// ---------------------------------------------------------------------------
// visibility

inline bool sees(const VehicleState& v, const VehicleState& t, double half_angle, double range) {
  const double dx = t.pose.position.x - v.pose.position.x;
  const double dy = t.pose.position.y - v.pose.position.y;
  if (std::sqrt(dx * dx + dy * dy) > range) return false;
  double bearing = std::atan2(dy, dx) - v.pose.heading;
  while (bearing > std::numbers::pi) bearing -= 2 * std::numbers::pi;
  while (bearing < -std::numbers::pi) bearing += 2 * std::numbers::pi;
  return std::abs(bearing) <= half_angle;
}

inline std::set<ActorId> fov(const WorldState& w, ActorId viewer, double half_angle, double range) {
  std::set<ActorId> out{viewer};
  for (const auto& [id, v] : w.actors)
    if (id != viewer && sees(w.actor(viewer), v, half_angle, range)) out.insert(id);
  return out;
}

inline std::set<ActorId> two_hop(const WorldState& w, ActorId ego, double half_angle, double range) {
  std::set<ActorId> out = fov(w, ego, half_angle, range);
  for (const auto& [u, vu] : w.actors) {
    if (u == ego || !out.contains(u) || !sees(w.actor(ego), vu, half_angle, range)) continue;
    for (const auto& [t, vt] : w.actors)
      if (t != u && sees(vu, vt, half_angle, range)) out.insert(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// lidar by marching

struct Capsule {
  Vec2 a, b;
  double r;
};

inline bool in_any(const std::vector<Capsule>& caps, Vec2 p) {
  for (const Capsule& c : caps)
    if (point_segment_distance(p, c.a, c.b) <= c.r) return true;
  return false;
}

inline double segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  auto side = [](Vec2 p, Vec2 q, Vec2 r) { return cross(q - p, r - p); };
  const double d1 = side(a, b, c), d2 = side(a, b, d), d3 = side(c, d, a), d4 = side(c, d, b);
  if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d), point_segment_distance(c, a, b),
                   point_segment_distance(d, a, b)});
}

/// Distance from p to the boundary of r, inside or out.
inline double rect_boundary_distance(const Rect& r, Vec2 p) {
  const double c = std::cos(r.heading), s = std::sin(r.heading);
  const double dx = p.x - r.cx, dy = p.y - r.cy;
  const double u = std::abs(c * dx + s * dy) - r.length / 2, v = std::abs(-s * dx + c * dy) - r.width / 2;
  if (u <= 0 && v <= 0) return std::min(-u, -v);
  return std::hypot(std::max(u, 0.0), std::max(v, 0.0));
}

/// March each beam until it enters another vehicle or crosses the road
/// edge (road = points within half a lane width of a centerline). Steps
/// are at most `step` and never longer than the distance to the nearest
/// boundary, so features thinner than a step are not skipped.
inline std::vector<double> march_lidar(const WorldState& w, ActorId ego, int beams, double max_range,
                                       double step = 0.01) {
  constexpr double kMinStep = 1e-6;
  const VehicleState& e = w.actor(ego);
  const Vec2 o = e.pose.position;
  std::vector<Capsule> road;
  if (w.map)
    for (const Lane& l : w.map->lanes())
      for (std::size_t k = 0; k + 1 < l.centerline.size(); ++k)
        road.push_back({l.centerline[k], l.centerline[k + 1], l.width / 2});
  const bool start_on_road = in_any(road, o);
  std::vector<double> out;
  for (int i = 0; i < beams; ++i) {
    const double ang = e.pose.heading + 2.0 * std::numbers::pi * i / beams;
    const Vec2 dir{std::cos(ang), std::sin(ang)};
    const Vec2 end = o + dir * max_range;
    std::vector<Capsule> near;
    for (const Capsule& c : road)
      if (segment_distance(o, end, c.a, c.b) <= c.r + 1e-6) near.push_back(c);
    std::vector<Rect> others;
    for (const auto& [id, v] : w.actors)
      if (id != ego && point_segment_distance(v.pose.position, o, end) <= std::hypot(v.length, v.width) / 2 + 1e-6)
        others.push_back({v.pose.position.x, v.pose.position.y, v.pose.heading, v.length, v.width});
    double hit = max_range;
    for (double t = 0.0;; ) {
      const Vec2 p = o + dir * t;
      bool blocked = false;
      double clearance = step;
      for (const Rect& r : others) {
        if (contains(r, p.x, p.y)) blocked = true;
        clearance = std::min(clearance, rect_boundary_distance(r, p));
      }
      if (w.map) {
        if (!blocked && in_any(near, p) != start_on_road) blocked = true;
        for (const Capsule& c : near) clearance = std::min(clearance, std::abs(point_segment_distance(p, c.a, c.b) - c.r));
      }
      if (blocked) {
        hit = t;
        break;
      }
      if (t >= max_range) break;
      t = std::min(max_range, t + std::max(clearance, kMinStep));
    }
    out.push_back(hit);
  }
  return out;
}

}  // namespace drivelab::oracle
