#pragma once

#include "drivelab/world.hpp"

namespace drivelab {

// Tuning of the rule-based driver. Kept separate from AutopilotConfig,
// which carries the per-vehicle behavior knobs.
struct AutopilotTuning {
  double min_lookahead = 3.0;      // m
  double lookahead_time = 1.0;     // s
  double speed_gain = 1.0;         // throttle per m/s of speed error
  double comfort_decel = 2.5;      // m/s^2, stop profile
  double lateral_accel = 2.0;      // m/s^2, curve speed limit
  double stop_margin = 2.0;        // m, vehicle center to stop line
  double follow_gap = 2.0;         // m, bumper gap kept to a leader
  double path_horizon = 40.0;      // m of route examined
  double signal_match = 1.0;       // m, signal-to-route distance
};

/// Pure-pursuit steering toward a lookahead waypoint with proportional
/// speed control. Lawful drivers also stop for red/yellow lights, stop
/// signs not yet served, and leading vehicles within headway. Throws
/// SimulationError when the actor has no route.
Control autopilot_control(const WorldState& world, ActorId id, const AutopilotConfig& cfg,
                          const AutopilotTuning& tuning = {});

}  // namespace drivelab
