#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "drivelab/geometry.hpp"

namespace drivelab {

inline constexpr double kDefaultReachRadius = 2.0;
inline constexpr double kWaypointSpacing = 1.0;

/// Ordered waypoints with a monotone cursor at the next unreached one.
struct Route {
  std::vector<Vec2> waypoints;
  std::size_t cursor = 0;
  double reach_radius = kDefaultReachRadius;
  // lane position where the waypoint list currently ends; used by planners
  // that grow the route (random roam)
  std::string end_lane;
  double end_s = 0.0;

  std::size_t remaining() const { return cursor < waypoints.size() ? waypoints.size() - cursor : 0; }
  bool exhausted() const { return cursor >= waypoints.size(); }
  std::span<const Vec2> ahead() const {
    return std::span<const Vec2>(waypoints).subspan(std::min(cursor, waypoints.size()));
  }

  /// Moves the cursor past the furthest waypoint within reach_radius of
  /// position, looking at most `window` waypoints ahead. Returns how many
  /// waypoints were passed.
  std::size_t advance(Vec2 position, std::size_t window = 10) {
    const std::size_t end = std::min(waypoints.size(), cursor + window);
    std::size_t last = cursor;
    bool hit = false;
    for (std::size_t i = cursor; i < end; ++i) {
      if (distance(position, waypoints[i]) <= reach_radius) {
        last = i;
        hit = true;
      }
    }
    if (!hit) return 0;
    const std::size_t passed = last + 1 - cursor;
    cursor = last + 1;
    return passed;
  }
};

/// Resamples a polyline at (at most) `spacing` meters, keeping both ends.
inline std::vector<Vec2> resample_polyline(std::span<const Vec2> pts, double spacing = kWaypointSpacing) {
  std::vector<Vec2> clean;
  for (const Vec2& p : pts)
    if (clean.empty() || distance(clean.back(), p) > 1e-9) clean.push_back(p);
  if (clean.size() < 2) return clean;
  std::vector<double> st(1, 0.0);
  for (std::size_t i = 0; i + 1 < clean.size(); ++i) st.push_back(st.back() + distance(clean[i], clean[i + 1]));
  const double total = st.back();
  const auto n = static_cast<std::size_t>(std::ceil(total / spacing - 1e-9));
  std::vector<Vec2> out;
  out.reserve(n + 1);
  std::size_t seg = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double s = k == n ? total : total * static_cast<double>(k) / static_cast<double>(n);
    while (seg + 2 < st.size() && st[seg + 1] < s) ++seg;
    const double len = st[seg + 1] - st[seg];
    const double t = std::clamp((s - st[seg]) / len, 0.0, 1.0);
    out.push_back(clean[seg] + (clean[seg + 1] - clean[seg]) * t);
  }
  return out;
}

}  // namespace drivelab
