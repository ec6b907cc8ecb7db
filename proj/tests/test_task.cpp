#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "drivelab/env.hpp"
#include "drivelab/errors.hpp"
#include "drivelab/task.hpp"
#include "support.hpp"

using namespace drivelab;
using namespace drivelab::testing;
using nlohmann::json;

namespace {

struct Scene {
  WorldState world = make_world(straight_map(200), 1);
  ActorId ego;
  Route route;
};

// Ego at the origin with the next waypoint 10 m along +x.
Scene scene(double heading, double speed) {
  Scene s;
  s.ego = put(s.world, {0, 0}, heading, speed);
  s.route.waypoints = {{10, 0}, {20, 0}};
  return s;
}

}  // namespace

TEST(Reward, StraightAtWaypoint) {
  Scene s = scene(0.0, 3.0);
  const RewardTerms t = compute_reward(s.world, s.ego, s.route, {}, {});
  EXPECT_DOUBLE_EQ(t.v_parallel, 3.0);
  EXPECT_DOUBLE_EQ(t.v_perp, 0.0);
  EXPECT_EQ(t.collision, 0);
  EXPECT_DOUBLE_EQ(t.total, 3.0);
}

TEST(Reward, PerpendicularToGoal) {
  Scene s = scene(std::numbers::pi / 2, 3.0);
  const RewardTerms t = compute_reward(s.world, s.ego, s.route, {}, {});
  EXPECT_NEAR(t.v_parallel, 0.0, 1e-12);
  EXPECT_NEAR(t.v_perp, 3.0, 1e-12);
  EXPECT_NEAR(t.total, -1.5, 1e-12);
}

TEST(Reward, StationaryCollision) {
  Scene s = scene(0.0, 0.0);
  RewardEvents ev;
  ev.collided = true;
  const RewardTerms t = compute_reward(s.world, s.ego, s.route, {}, ev);
  EXPECT_EQ(t.collision, 1);
  EXPECT_DOUBLE_EQ(t.total, -100.0);
}

TEST(Reward, FortyFiveDegrees) {
  Scene s = scene(std::numbers::pi / 4, 3.0);
  const RewardTerms t = compute_reward(s.world, s.ego, s.route, {}, {});
  // independent evaluation of the dot and cross products
  const double wx = 3.0 * std::cos(std::numbers::pi / 4), wy = 3.0 * std::sin(std::numbers::pi / 4);
  EXPECT_NEAR(t.v_parallel, wx * 1.0 + wy * 0.0, 1e-12);
  EXPECT_NEAR(t.v_perp, std::abs(wx * 0.0 - wy * 1.0), 1e-12);
  EXPECT_NEAR(t.total, 3.0 / std::sqrt(2.0) * 0.5, 1e-12);
}

TEST(Reward, BonusTermsAndCollisionMonotone) {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    Scene s = scene(rng.uniform(-3, 3), rng.uniform(-2, 12));
    RewardConfig cfg{rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 200), 5, 20, 100};
    RewardEvents ev;
    ev.waypoints_reached = rng.index(4);
    ev.destination = rng.uniform() < 0.3;
    ev.out_of_lane = rng.uniform() < 0.3;
    ev.signal = rng.uniform() < 0.2 ? -cfg.gamma : 0.0;
    const RewardTerms a = compute_reward(s.world, s.ego, s.route, cfg, ev);
    const double speed = s.world.actor(s.ego).speed;
    EXPECT_NEAR(a.v_parallel * a.v_parallel + a.v_perp * a.v_perp, speed * speed, 1e-9);
    EXPECT_GE(a.v_perp, 0.0);
    const double bonus = 5.0 * static_cast<double>(ev.waypoints_reached) + (ev.destination ? 100.0 : 0.0) -
                         (ev.out_of_lane ? 20.0 : 0.0) + ev.signal;
    EXPECT_NEAR(a.bonus_terms, bonus, 1e-12);
    EXPECT_NEAR(a.total, cfg.alpha * a.v_parallel - cfg.beta * a.v_perp + bonus, 1e-9);
    ev.collided = true;
    const RewardTerms b = compute_reward(s.world, s.ego, s.route, cfg, ev);
    EXPECT_NEAR(a.total - b.total, cfg.gamma, 1e-9);
  }
}

TEST(Reward, ExhaustedRouteUsesHeading) {
  Scene s = scene(0.5, 2.0);
  s.route.cursor = s.route.waypoints.size();
  const RewardTerms t = compute_reward(s.world, s.ego, s.route, {}, {});
  EXPECT_NEAR(t.v_parallel, 2.0, 1e-12);
  EXPECT_NEAR(t.v_perp, 0.0, 1e-12);
}

TEST(Termination, PriorityAndThresholds) {
  TaskConfig cfg;
  Scene s = scene(0.0, 0.0);
  Route done = s.route;
  done.cursor = done.waypoints.size();
  EXPECT_EQ(check_termination(s.world, s.ego, done, cfg, true), TerminationCause::collision);
  EXPECT_EQ(check_termination(s.world, s.ego, done, cfg, false), TerminationCause::destination);
  EXPECT_EQ(check_termination(s.world, s.ego, s.route, cfg, false), std::nullopt);

  s.world.tick = 600;
  EXPECT_EQ(check_termination(s.world, s.ego, s.route, cfg, false), TerminationCause::timeout);
  EXPECT_EQ(check_termination(s.world, s.ego, done, cfg, false), TerminationCause::destination);

  s.world.actor(s.ego).pose.position.y = 1.75 + 1.01;
  EXPECT_EQ(check_termination(s.world, s.ego, done, cfg, false), TerminationCause::out_of_lane);
  EXPECT_EQ(check_termination(s.world, s.ego, done, cfg, true), TerminationCause::collision);
  s.world.actor(s.ego).pose.position.y = 1.75 + 0.99;
  s.world.tick = 10;
  EXPECT_EQ(check_termination(s.world, s.ego, s.route, cfg, false), std::nullopt);
}

TEST(Termination, DistanceBudget) {
  TaskConfig cfg;
  cfg.distance_budget = 200.0;
  Scene s = scene(0.0, 0.0);
  s.world.actor(s.ego).odometer = 199.9;
  EXPECT_EQ(check_termination(s.world, s.ego, s.route, cfg, false), std::nullopt);
  s.world.actor(s.ego).odometer = 200.0;
  EXPECT_EQ(check_termination(s.world, s.ego, s.route, cfg, false), TerminationCause::destination);
}

namespace {

WorldState signal_world(const std::string& kind) {
  json sig = {{"id", "S"}, {"kind", kind}, {"lane", "L0"}, {"s", 50.0}};
  if (kind == "traffic_light") {
    sig["phase"] = {10, 3, 30};
    sig["offset"] = 13;  // red from t = 0
  }
  WorldState w = make_world(map_from({{"lanes", {lane_json("L0", {{0, 0}, {100, 0}})}}, {"signals", {sig}}}), 1);
  update_signals(w);
  return w;
}

}  // namespace

TEST(SignalCompliance, RunningRedCostsGamma) {
  WorldState w = signal_world("traffic_light");
  const ActorId ego = put(w, {49.5, 0}, 0.0, 8.0);
  const WorldState prev = w;
  tick(w, {});
  ASSERT_GT(w.actor(ego).pose.position.x, 50.0);
  EXPECT_DOUBLE_EQ(signal_compliance_reward(prev, w, ego, {}), -100.0);
  const WorldState prev2 = w;
  tick(w, {});
  EXPECT_DOUBLE_EQ(signal_compliance_reward(prev2, w, ego, {}), 0.0);
}

TEST(SignalCompliance, StopSignBonusOncePerSign) {
  WorldState w = signal_world("stop_sign");
  const ActorId ego = put(w, {48.0, 0}, 0.0, 0.0);
  WorldState prev = w;
  tick(w, {});
  EXPECT_DOUBLE_EQ(signal_compliance_reward(prev, w, ego, {}), 5.0);
  // roll a little and stop again at the same sign
  w.actor(ego).speed = 1.0;
  prev = w;
  tick(w, {});
  EXPECT_DOUBLE_EQ(signal_compliance_reward(prev, w, ego, {}), 0.0);
  w.actor(ego).speed = 0.0;
  prev = w;
  tick(w, {});
  EXPECT_DOUBLE_EQ(signal_compliance_reward(prev, w, ego, {}), 0.0);
}

TEST(Tasks, RegistryDefaults) {
  EXPECT_EQ(task_names().size(), 13u);
  const TaskConfig simple = make_task("right_turn_simple");
  EXPECT_EQ(simple.traffic.count(simple.difficulty), 0);
  EXPECT_TRUE(std::holds_alternative<FixedEnding>(simple.planner));
  const TaskConfig hard = make_task("right_turn_hard");
  EXPECT_EQ(hard.traffic.count(hard.difficulty), 8);
  EXPECT_EQ(hard.traffic.behavior_for(hard.difficulty).aggression, Aggression::aggressive);
  const TaskConfig nav = make_task("navigation");
  EXPECT_TRUE(std::holds_alternative<RandomRoam>(nav.planner));
  EXPECT_EQ(nav.distance_budget, 200.0);
  for (const auto& name : task_names()) EXPECT_NO_THROW(validate_task(make_task(name))) << name;
}

TEST(Tasks, Overrides) {
  const TaskConfig fov = make_task("right_turn_hard", {{"visibility.mode", "FOV"}});
  EXPECT_EQ(fov.visibility.mode, VisibilityMode::fov);
  EXPECT_EQ(fov.traffic.count(fov.difficulty), 8);
  EXPECT_EQ(fov.map, make_task("right_turn_hard").map);

  const TaskConfig nested = make_task("lane_merge", {{"reward", {{"alpha", 2.0}}}, {"time_limit", 30}});
  EXPECT_EQ(nested.reward.alpha, 2.0);
  EXPECT_EQ(nested.reward.beta, 0.5);
  EXPECT_EQ(nested.time_limit, 30.0);

  const TaskConfig planner = make_task("lane_merge", {{"planner", {{"kind", "fixed_ending"}, {"goal", {60, 0}}}}});
  EXPECT_EQ(std::get<FixedEnding>(planner.planner).goal, (Vec2{60, 0}));

  EXPECT_THROW(make_task("lane_merge", {{"visibility.colour", 1}}), ConfigError);
  EXPECT_THROW(make_task("lane_merge", {{"visibility.mode", "X-RAY"}}), ConfigError);
  EXPECT_THROW(make_task("lane_merge", {{"modalities", {"bev", "camera"}}}), ConfigError);
  try {
    make_task("bogus");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("right_turn_simple"), std::string::npos);
  }
}

TEST(Tasks, JsonRoundTrip) {
  for (const auto& name : task_names()) {
    const json j = task_to_json(make_task(name));
    EXPECT_EQ(task_to_json(task_from_json(j)), j) << name;
  }
  json bad = task_to_json(make_task("overtake"));
  bad["surprise"] = true;
  EXPECT_THROW(task_from_json(bad), ConfigError);
}
