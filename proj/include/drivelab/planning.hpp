#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "drivelab/road_map.hpp"
#include "drivelab/route.hpp"
#include "drivelab/world.hpp"

namespace drivelab {

struct RandomRoam {
  bool operator==(const RandomRoam&) const = default;
};
struct FixedPath {
  std::vector<Vec2> points;  // >= 2 user locations
  bool operator==(const FixedPath&) const = default;
};
struct FixedEnding {
  Vec2 goal{};
  bool operator==(const FixedEnding&) const = default;
};

using PlannerKind = std::variant<RandomRoam, FixedPath, FixedEnding>;

std::string planner_name(const PlannerKind& kind);

/// Route planner extension point. A planner builds the initial route and
/// updates it once per step.
class RoutePlanner {
 public:
  virtual ~RoutePlanner() = default;
  virtual Route init_route(const RoadMap& map, const VehicleState& ego, Rng& rng) = 0;
  /// Advances the cursor past reached waypoints (and may grow the route).
  /// Returns the number of waypoints passed.
  virtual std::size_t extend_route(const RoadMap& map, const VehicleState& ego, Route& route, Rng& rng) = 0;
};

std::unique_ptr<RoutePlanner> make_planner(const PlannerKind& kind);

Route init_route(const PlannerKind& kind, const RoadMap& map, const VehicleState& ego, Rng& rng);
std::size_t extend_route(const PlannerKind& kind, const RoadMap& map, const VehicleState& ego, Route& route,
                         Rng& rng);

// Random roam keeps at least this many waypoints ahead of the cursor.
inline constexpr std::size_t kRoamMinAhead = 20;

/// Lane-graph search nodes are (lane, s) samples every `resolution` meters
/// plus each lane's end. Edges: consecutive samples (cost = arc length),
/// lane end -> successor start (cost = gap distance), and lane changes to a
/// left/right neighbour landing `lane_change_length` ahead (cost = chord).
/// Every edge costs at least the Euclidean distance between its endpoints,
/// so the straight-line heuristic is admissible.
struct AStarOptions {
  bool use_heuristic = true;
  double resolution = 1.0;
  double lane_change_length = 8.0;
  bool record_expansions = false;
};

struct SearchNode {
  std::string lane;
  double s = 0.0;
  double heuristic = 0.0;
  double cost_so_far = 0.0;
};

struct AStarResult {
  Route route;
  double cost = 0.0;
  std::vector<Vec2> polyline;          // unresampled lane-following geometry
  std::vector<SearchNode> path;        // start, samples..., goal
  std::vector<SearchNode> expansions;  // when record_expansions
};

/// Minimum-arc-length route from start to goal over the lane graph.
/// Ties are broken by smaller lane id, then smaller s. Throws
/// PlanningError when the goal is unreachable or a point is off-map.
AStarResult a_star_route(const RoadMap& map, Vec2 start, Vec2 goal, const AStarOptions& options = {});

/// Arc length of the projection of p onto a specific lane.
double project_onto_lane(const Lane& lane, Vec2 p);

/// Sample stations of a lane at the given resolution, ending at its length.
std::vector<double> lane_samples(const Lane& lane, double resolution);

}  // namespace drivelab
