#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "drivelab/geometry.hpp"

namespace drivelab {

struct Lane {
  std::string id;
  double width = 3.5;
  std::vector<Vec2> centerline;
  std::vector<std::string> successors;
  std::optional<std::string> left;
  std::optional<std::string> right;
  // arc length at each centerline vertex; filled by RoadMap
  std::vector<double> stations;

  double length() const { return stations.empty() ? 0.0 : stations.back(); }
  /// Centerline point at arc length s (clamped to the lane).
  Vec2 point_at(double s) const;
  /// Unit tangent at arc length s. At an interior vertex this is the
  /// bisector of the two adjacent segment directions.
  Vec2 tangent_at(double s) const;
  std::size_t segment_at(double s) const;
};

enum class SignalKind { traffic_light, stop_sign };
enum class SignalPhase { green, yellow, red };

struct PhaseSchedule {
  double green = 0.0;
  double yellow = 0.0;
  double red = 0.0;
  // seconds added to sim time before evaluating the cycle
  double offset = 0.0;

  double cycle() const { return green + yellow + red; }
  SignalPhase phase_at(double t) const;
};

struct Signal {
  std::string id;
  SignalKind kind = SignalKind::traffic_light;
  std::string lane;
  double s = 0.0;
  std::optional<PhaseSchedule> schedule;
  Vec2 position{};

  /// Stop signs permanently read as red.
  SignalPhase phase_at(double t) const {
    return schedule ? schedule->phase_at(t) : SignalPhase::red;
  }
};

std::string_view to_string(SignalPhase p);
std::string_view to_string(SignalKind k);

struct LaneQuery {
  std::size_t lane_index = 0;
  std::string lane_id;
  double s = 0.0;
  double lateral = 0.0;  // positive = left of travel direction

  double distance() const { return lateral < 0.0 ? -lateral : lateral; }
};

/// Validated lane graph. Lanes are stored sorted by id.
class RoadMap {
 public:
  RoadMap() = default;
  RoadMap(std::vector<Lane> lanes, std::vector<Signal> signals);

  const std::vector<Lane>& lanes() const { return lanes_; }
  const std::vector<Signal>& signals() const { return signals_; }
  bool empty() const { return lanes_.empty(); }

  const Lane& lane(std::string_view id) const;
  const Lane* find_lane(std::string_view id) const;
  std::optional<std::size_t> lane_index(std::string_view id) const;

  /// Nearest lane by perpendicular distance to its centerline. Ties go to
  /// the smaller lane id, then the earlier segment.
  LaneQuery lane_query(Vec2 p) const;

  // Axis-aligned bounds of all centerlines.
  Vec2 min_corner() const { return min_; }
  Vec2 max_corner() const { return max_; }

 private:
  struct SegmentRef {
    std::uint32_t lane;
    std::uint32_t segment;
  };

  void build_index();
  std::int64_t cell_key(std::int64_t ix, std::int64_t iy) const;

  std::vector<Lane> lanes_;
  std::vector<Signal> signals_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::unordered_map<std::int64_t, std::vector<SegmentRef>> grid_;
  double cell_ = 10.0;
  Vec2 min_{}, max_{};
};

/// Parses and validates a map document (JSON). Throws MapError.
RoadMap load_map(std::string_view document);
RoadMap load_map_file(const std::filesystem::path& path);

/// Directory holding the built-in maps: $DRIVELAB_MAP_DIR if set, else the
/// install-time default.
std::filesystem::path default_map_dir();
/// Resolves a bare map file name against default_map_dir().
std::filesystem::path resolve_map_path(const std::string& name);

}  // namespace drivelab
