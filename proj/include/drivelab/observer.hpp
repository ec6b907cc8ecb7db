#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "drivelab/world.hpp"

namespace drivelab {

enum class VisibilityMode { fov, sfov, full };

struct VisibilityConfig {
  VisibilityMode mode = VisibilityMode::full;
  double cone_half_angle = std::numbers::pi / 3.0;  // 120 degree cone
  double range = 30.0;
};

enum class IntentionScope { visible_only, all };

struct IntentionConfig {
  bool enabled = false;
  std::size_t shared_waypoints = 10;
  IntentionScope scope = IntentionScope::visible_only;
};

struct Palette {
  std::uint8_t background = 0;
  std::uint8_t road = 1;
  std::uint8_t route_waypoint = 2;
  std::uint8_t intention_waypoint = 3;
  std::uint8_t signal_red = 4;
  std::uint8_t signal_green = 5;
  std::uint8_t other_vehicle = 6;
  std::uint8_t ego = 7;
};

struct BevSpec {
  int size = 128;
  double resolution = 0.25;  // m per pixel
  Palette palette{};

  int anchor_col() const { return size / 2; }
  int anchor_row() const { return size * 3 / 4; }
};

struct LidarSpec {
  int beams = 72;
  double max_range = 30.0;
};

/// Row-major image of palette indices.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), pixels(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}
  std::uint8_t& at(int row, int col) { return pixels[static_cast<std::size_t>(row * width + col)]; }
  std::uint8_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row * width + col)]; }
  bool operator==(const Image&) const = default;
};

using ScalarMap = std::map<std::string, double>;
using Payload = std::variant<Image, std::vector<double>, ScalarMap>;

/// Observation entries in handler registration order.
struct ObservationBundle {
  std::vector<std::pair<std::string, Payload>> entries;

  const Payload* find(std::string_view name) const;
  const Payload& at(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  std::vector<std::string> names() const;
  bool operator==(const ObservationBundle&) const = default;
};

using Intentions = std::map<ActorId, std::vector<Vec2>>;

struct HandlerInput {
  const WorldState& world;
  ActorId ego;
  const std::set<ActorId>& visible;
  const Intentions& intentions;
};

using DataHandler = std::function<Payload(const HandlerInput&)>;

class Observer {
 public:
  /// Throws ConfigError when the name is already registered.
  Observer& register_handler(std::string name, DataHandler handler);

  bool has_handler(std::string_view name) const;
  std::vector<std::string> handler_names() const;

  /// Computes the visible set and intentions once and runs every handler in
  /// registration order. Routes are read from world.routes. A failing
  /// handler is rethrown as an Error naming it.
  ObservationBundle collect(const WorldState& world, ActorId ego, const VisibilityConfig& vcfg,
                            const IntentionConfig& icfg) const;

 private:
  std::vector<std::pair<std::string, DataHandler>> handlers_;
};

/// Whether `target` lies in the sensing cone of `viewer`.
bool in_fov(const VehicleState& viewer, const VehicleState& target, const VisibilityConfig& cfg);

std::set<ActorId> visible_set(const WorldState& world, ActorId ego, const VisibilityConfig& cfg);

/// Next K route waypoints of every actor in scope except the ego itself,
/// whose route is drawn separately.
Intentions collect_intentions(const WorldState& world, ActorId ego, const IntentionConfig& icfg,
                              const std::map<ActorId, Route>& routes, const std::set<ActorId>& visible);

/// Ego-centric semantic raster: ego at (anchor_row, anchor_col) heading up.
Image render_bev(const WorldState& world, ActorId ego, const BevSpec& spec, const std::set<ActorId>& visible,
                 const Intentions& intentions);

/// Ego-frame coordinates (x forward, y left) of pixel (row, col)'s center.
Vec2 bev_pixel_center(const BevSpec& spec, int row, int col);

/// Planar range scan from the ego center; not masked by visibility.
std::vector<double> lidar_scan(const WorldState& world, ActorId ego, const LidarSpec& spec);

inline constexpr std::size_t kStateVectorRows = 16;

/// Rows of [x, y, heading, speed] relative to the ego frame, ego first,
/// then visible actors by distance, zero-padded to kStateVectorRows.
std::vector<double> state_vector(const WorldState& world, ActorId ego, const std::set<ActorId>& visible);

/// Intention waypoints in the ego frame, one block of K (x, y) pairs per
/// actor ordered as in state_vector, zero-padded.
std::vector<double> intention_vector(const WorldState& world, ActorId ego, const Intentions& intentions,
                                     std::size_t k);

/// Built-in handlers: "bev", "lidar", "state_vector", "intentions".
DataHandler make_builtin_handler(std::string_view name, const BevSpec& bev = {}, const LidarSpec& lidar = {},
                                 const IntentionConfig& icfg = {});
const std::vector<std::string>& builtin_handler_names();

}  // namespace drivelab
