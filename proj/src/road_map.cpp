#include "drivelab/road_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "drivelab/errors.hpp"

#ifndef DRIVELAB_DEFAULT_MAP_DIR
#define DRIVELAB_DEFAULT_MAP_DIR "maps"
#endif

namespace drivelab {

using nlohmann::json;

std::size_t Lane::segment_at(double s) const {
  // last vertex index i with stations[i] <= s, capped to the final segment
  auto it = std::upper_bound(stations.begin(), stations.end(), s);
  std::size_t i = it == stations.begin() ? 0 : static_cast<std::size_t>(it - stations.begin()) - 1;
  return std::min(i, centerline.size() - 2);
}

Vec2 Lane::point_at(double s) const {
  s = std::clamp(s, 0.0, length());
  const std::size_t i = segment_at(s);
  const double seg = stations[i + 1] - stations[i];
  const double t = (s - stations[i]) / seg;
  return centerline[i] + (centerline[i + 1] - centerline[i]) * t;
}

Vec2 Lane::tangent_at(double s) const {
  s = std::clamp(s, 0.0, length());
  const std::size_t i = segment_at(s);
  auto dir = [this](std::size_t k) {
    const Vec2 d = centerline[k + 1] - centerline[k];
    return d * (1.0 / norm(d));
  };
  constexpr double kVertexTol = 1e-9;
  if (i > 0 && std::abs(s - stations[i]) < kVertexTol) {
    const Vec2 b = dir(i - 1) + dir(i);
    return b * (1.0 / norm(b));
  }
  if (i + 2 < centerline.size() && std::abs(s - stations[i + 1]) < kVertexTol) {
    const Vec2 b = dir(i) + dir(i + 1);
    return b * (1.0 / norm(b));
  }
  return dir(i);
}

SignalPhase PhaseSchedule::phase_at(double t) const {
  const double c = cycle();
  if (c <= 0.0) return SignalPhase::red;
  double local = std::fmod(t + offset, c);
  if (local < 0.0) local += c;
  if (local < green) return SignalPhase::green;
  if (local < green + yellow) return SignalPhase::yellow;
  return SignalPhase::red;
}

std::string_view to_string(SignalPhase p) {
  switch (p) {
    case SignalPhase::green: return "green";
    case SignalPhase::yellow: return "yellow";
    case SignalPhase::red: return "red";
  }
  return "red";
}

std::string_view to_string(SignalKind k) {
  return k == SignalKind::traffic_light ? "traffic_light" : "stop_sign";
}

RoadMap::RoadMap(std::vector<Lane> lanes, std::vector<Signal> signals)
    : lanes_(std::move(lanes)), signals_(std::move(signals)) {
  std::sort(lanes_.begin(), lanes_.end(), [](const Lane& a, const Lane& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < lanes_.size(); ++i) {
    Lane& l = lanes_[i];
    if (!by_id_.emplace(l.id, i).second) throw MapError(l.id, "duplicate lane id");
    if (l.centerline.size() < 2) throw MapError(l.id, "centerline needs at least 2 points");
    if (!(l.width > 0.0) || !std::isfinite(l.width)) throw MapError(l.id, "width must be positive");
    l.stations.assign(1, 0.0);
    for (std::size_t k = 0; k + 1 < l.centerline.size(); ++k) {
      const Vec2 a = l.centerline[k], b = l.centerline[k + 1];
      if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(b.x) || !std::isfinite(b.y))
        throw MapError(l.id, "non-finite centerline point");
      const double len = distance(a, b);
      if (!(len > 0.0))
        throw MapError(l.id, "degenerate polyline: zero-length segment " + std::to_string(k));
      l.stations.push_back(l.stations.back() + len);
    }
  }
  for (const Lane& l : lanes_) {
    for (const auto& succ : l.successors)
      if (!by_id_.contains(succ)) throw MapError(l.id, "dangling successor reference '" + succ + "'");
    if (l.left && !by_id_.contains(*l.left))
      throw MapError(l.id, "dangling left reference '" + *l.left + "'");
    if (l.right && !by_id_.contains(*l.right))
      throw MapError(l.id, "dangling right reference '" + *l.right + "'");
  }
  std::set<std::string> signal_ids;
  for (Signal& s : signals_) {
    if (!signal_ids.insert(s.id).second) throw MapError(s.lane, "duplicate signal id '" + s.id + "'");
    const Lane* l = find_lane(s.lane);
    if (!l) throw MapError(s.lane, "signal '" + s.id + "' references a missing lane");
    if (s.s < 0.0 || s.s > l->length())
      throw MapError(s.lane, "signal '" + s.id + "' position outside lane");
    if (s.kind == SignalKind::traffic_light) {
      if (!s.schedule) throw MapError(s.lane, "traffic light '" + s.id + "' needs a phase schedule");
      const auto& p = *s.schedule;
      if (p.green < 0.0 || p.yellow < 0.0 || p.red < 0.0 || !(p.cycle() > 0.0))
        throw MapError(s.lane, "traffic light '" + s.id + "' has an invalid phase schedule");
    }
    s.position = l->point_at(s.s);
  }
  build_index();
}

const Lane& RoadMap::lane(std::string_view id) const {
  const Lane* l = find_lane(id);
  if (!l) throw MapError(std::string(id), "no such lane");
  return *l;
}

const Lane* RoadMap::find_lane(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &lanes_[it->second];
}

std::optional<std::size_t> RoadMap::lane_index(std::string_view id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::int64_t RoadMap::cell_key(std::int64_t ix, std::int64_t iy) const {
  return (ix << 32) ^ (iy & 0xffffffff);
}

void RoadMap::build_index() {
  grid_.clear();
  if (lanes_.empty()) return;
  min_ = {INFINITY, INFINITY};
  max_ = {-INFINITY, -INFINITY};
  for (std::uint32_t li = 0; li < lanes_.size(); ++li) {
    const auto& pts = lanes_[li].centerline;
    for (std::uint32_t k = 0; k + 1 < pts.size(); ++k) {
      const Vec2 a = pts[k], b = pts[k + 1];
      const auto x0 = static_cast<std::int64_t>(std::floor(std::min(a.x, b.x) / cell_));
      const auto x1 = static_cast<std::int64_t>(std::floor(std::max(a.x, b.x) / cell_));
      const auto y0 = static_cast<std::int64_t>(std::floor(std::min(a.y, b.y) / cell_));
      const auto y1 = static_cast<std::int64_t>(std::floor(std::max(a.y, b.y) / cell_));
      for (auto ix = x0; ix <= x1; ++ix)
        for (auto iy = y0; iy <= y1; ++iy) grid_[cell_key(ix, iy)].push_back({li, k});
    }
    for (const Vec2& p : pts) {
      min_ = {std::min(min_.x, p.x), std::min(min_.y, p.y)};
      max_ = {std::max(max_.x, p.x), std::max(max_.y, p.y)};
    }
  }
}

LaneQuery RoadMap::lane_query(Vec2 p) const {
  if (lanes_.empty()) throw MapError("", "lane query on an empty map");

  // (distance, lane, segment) ordered lexicographically
  double best_d = INFINITY;
  std::uint32_t best_lane = 0, best_seg = 0;
  auto consider = [&](const SegmentRef& ref) {
    const auto& pts = lanes_[ref.lane].centerline;
    const double d = point_segment_distance(p, pts[ref.segment], pts[ref.segment + 1]);
    if (std::tie(d, ref.lane, ref.segment) < std::tie(best_d, best_lane, best_seg)) {
      best_d = d;
      best_lane = ref.lane;
      best_seg = ref.segment;
    }
  };

  const auto cx = static_cast<std::int64_t>(std::floor(p.x / cell_));
  const auto cy = static_cast<std::int64_t>(std::floor(p.y / cell_));
  // rings beyond this radius cannot contain any segment
  const double reach = std::max({std::abs(p.x - min_.x), std::abs(p.x - max_.x),
                                 std::abs(p.y - min_.y), std::abs(p.y - max_.y)});
  const auto max_ring = static_cast<std::int64_t>(std::ceil(reach / cell_)) + 1;
  for (std::int64_t r = 0; r <= max_ring; ++r) {
    for (std::int64_t ix = cx - r; ix <= cx + r; ++ix) {
      for (std::int64_t iy = cy - r; iy <= cy + r; ++iy) {
        if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != r) continue;
        auto it = grid_.find(cell_key(ix, iy));
        if (it == grid_.end()) continue;
        for (const auto& ref : it->second) consider(ref);
      }
    }
    // every cell in ring r+1 is at least r cells away from p
    if (best_d < static_cast<double>(r) * cell_) break;
  }

  const Lane& lane = lanes_[best_lane];
  const Vec2 a = lane.centerline[best_seg], b = lane.centerline[best_seg + 1];
  const double t = project_on_segment(p, a, b);
  const Vec2 q = a + (b - a) * t;
  const double side = cross(b - a, p - q);
  LaneQuery out;
  out.lane_index = best_lane;
  out.lane_id = lane.id;
  out.s = lane.stations[best_seg] + t * (lane.stations[best_seg + 1] - lane.stations[best_seg]);
  out.lateral = side >= 0.0 ? best_d : -best_d;
  return out;
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    const std::string& lane, std::string_view where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw MapError(lane, "unknown field '" + key + "' in " + std::string(where));
  }
}

const json& require(const json& obj, const char* key, const std::string& lane) {
  auto it = obj.find(key);
  if (it == obj.end()) throw MapError(lane, std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& v, const std::string& lane, const char* what) {
  if (!v.is_number()) throw MapError(lane, std::string(what) + " must be a number");
  return v.get<double>();
}

std::optional<std::string> optional_ref(const json& obj, const char* key, const std::string& lane) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw MapError(lane, std::string(key) + " must be a string or null");
  return it->get<std::string>();
}

}  // namespace

RoadMap load_map(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw MapError("", std::string("map is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw MapError("", "map document must be an object");
  reject_unknown(doc, {"lanes", "signals"}, "", "map");
  const json& jl = require(doc, "lanes", "");
  if (!jl.is_array()) throw MapError("", "'lanes' must be an array");

  std::vector<Lane> lanes;
  for (const json& item : jl) {
    if (!item.is_object()) throw MapError("", "lane entries must be objects");
    auto idv = item.find("id");
    if (idv == item.end() || !idv->is_string()) throw MapError("", "lane without a string id");
    Lane l;
    l.id = idv->get<std::string>();
    reject_unknown(item, {"id", "width", "centerline", "successors", "left", "right"}, l.id, "lane");
    l.width = number(require(item, "width", l.id), l.id, "width");
    const json& cl = require(item, "centerline", l.id);
    if (!cl.is_array()) throw MapError(l.id, "centerline must be an array");
    for (const json& pt : cl) {
      if (!pt.is_array() || pt.size() != 2) throw MapError(l.id, "centerline points must be [x, y]");
      l.centerline.push_back({number(pt[0], l.id, "x"), number(pt[1], l.id, "y")});
    }
    const json& succ = require(item, "successors", l.id);
    if (!succ.is_array()) throw MapError(l.id, "successors must be an array");
    for (const json& s : succ) {
      if (!s.is_string()) throw MapError(l.id, "successor ids must be strings");
      l.successors.push_back(s.get<std::string>());
    }
    l.left = optional_ref(item, "left", l.id);
    l.right = optional_ref(item, "right", l.id);
    lanes.push_back(std::move(l));
  }

  std::vector<Signal> signals;
  if (auto js = doc.find("signals"); js != doc.end()) {
    if (!js->is_array()) throw MapError("", "'signals' must be an array");
    for (const json& item : *js) {
      if (!item.is_object()) throw MapError("", "signal entries must be objects");
      Signal s;
      auto lane_v = item.find("lane");
      if (lane_v == item.end() || !lane_v->is_string()) throw MapError("", "signal without a lane");
      s.lane = lane_v->get<std::string>();
      reject_unknown(item, {"id", "kind", "lane", "s", "phase", "offset"}, s.lane, "signal");
      const json& id = require(item, "id", s.lane);
      if (!id.is_string()) throw MapError(s.lane, "signal id must be a string");
      s.id = id.get<std::string>();
      const json& kind = require(item, "kind", s.lane);
      if (kind == "traffic_light") {
        s.kind = SignalKind::traffic_light;
      } else if (kind == "stop_sign") {
        s.kind = SignalKind::stop_sign;
      } else {
        throw MapError(s.lane, "signal kind must be traffic_light or stop_sign");
      }
      s.s = number(require(item, "s", s.lane), s.lane, "signal s");
      if (auto ph = item.find("phase"); ph != item.end() && !ph->is_null()) {
        if (!ph->is_array() || ph->size() != 3)
          throw MapError(s.lane, "phase must be [green, yellow, red]");
        PhaseSchedule p;
        p.green = number((*ph)[0], s.lane, "green");
        p.yellow = number((*ph)[1], s.lane, "yellow");
        p.red = number((*ph)[2], s.lane, "red");
        if (auto off = item.find("offset"); off != item.end())
          p.offset = number(*off, s.lane, "offset");
        s.schedule = p;
      }
      signals.push_back(std::move(s));
    }
  }
  return RoadMap(std::move(lanes), std::move(signals));
}

RoadMap load_map_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MapError("", "cannot open map file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_map(ss.str());
}

std::filesystem::path default_map_dir() {
  if (const char* env = std::getenv("DRIVELAB_MAP_DIR"); env && *env) return env;
  return DRIVELAB_DEFAULT_MAP_DIR;
}

std::filesystem::path resolve_map_path(const std::string& name) {
  std::filesystem::path p(name);
  if (p.is_absolute() || std::filesystem::exists(p)) return p;
  return default_map_dir() / p;
}

}  // namespace drivelab
