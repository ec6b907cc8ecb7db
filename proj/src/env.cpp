#include "drivelab/env.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <unordered_map>

#include "drivelab/autopilot.hpp"
#include "drivelab/errors.hpp"

namespace drivelab {

Action Action::discrete(int index) {
  if (index < 0 || index >= kDiscreteActions)
    throw ProtocolError("discrete action " + std::to_string(index) + " outside [0, " +
                        std::to_string(kDiscreteActions - 1) + "]");
  static constexpr double throttles[3] = {-1.0, 0.0, 1.0};
  static constexpr double steers[5] = {-0.6, -0.2, 0.0, 0.2, 0.6};
  return {throttles[index / 5], steers[index % 5]};
}

Action Action::clamped() const {
  // NaN maps to 0 so that a bad client cannot poison the state
  auto clamp = [](double v) { return std::isnan(v) ? 0.0 : std::clamp(v, -1.0, 1.0); };
  return {clamp(throttle), clamp(steer_cmd)};
}

std::shared_ptr<const RoadMap> load_map_cached(const std::string& name) {
  static std::mutex mu;
  static std::unordered_map<std::string, std::shared_ptr<const RoadMap>> cache;
  const std::string key = resolve_map_path(name).string();
  std::lock_guard lock(mu);
  auto& slot = cache[key];
  if (!slot) slot = std::make_shared<const RoadMap>(load_map_file(key));
  return slot;
}

Env::Env(TaskConfig cfg)
    : cfg_(std::move(cfg)),
      map_(load_map_cached(cfg_.map)),
      ego_planner_(make_planner(cfg_.planner)),
      roam_(make_planner(RandomRoam{})) {
  validate_task(cfg_);
  for (const auto& m : cfg_.modalities)
    observer_.register_handler(m, make_builtin_handler(m, cfg_.bev, cfg_.lidar, cfg_.intention));
  world_ = make_world(map_, 0, cfg_.dynamics);
}

const Route& Env::ego_route() const {
  auto it = world_.routes.find(ego_);
  if (it == world_.routes.end()) throw ProtocolError("no active episode");
  return it->second;
}

bool Env::place_traffic(bool at_entry) {
  const AutopilotConfig behavior = cfg_.traffic.behavior_for(cfg_.difficulty);
  constexpr int kAttempts = 100;
  constexpr double kEntryWindow = 10.0;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    const std::string& lane_id = cfg_.traffic.spawn_lanes[world_.rng.index(cfg_.traffic.spawn_lanes.size())];
    const Lane& lane = map_->lane(lane_id);
    const double hi = at_entry ? std::min(kEntryWindow, lane.length()) : std::max(0.0, lane.length() - 5.0);
    const double offset = world_.rng.uniform(0.0, hi);
    const Vec2 p = lane.point_at(offset);
    const bool crowded = std::any_of(world_.actors.begin(), world_.actors.end(), [&](const auto& kv) {
      return distance(kv.second.pose.position, p) < cfg_.traffic.min_clearance;
    });
    if (crowded) continue;
    SpawnSpec spec{.lane = lane_id,
                   .offset = offset,
                   .speed = behavior.target_speed,
                   .controller = Controller::autopilot,
                   .role = Role::background,
                   .autopilot = behavior};
    const Vec2 t = lane.tangent_at(offset);
    if (!footprint_free(world_, OrientedRect{p, std::atan2(t.y, t.x), spec.blueprint.length, spec.blueprint.width}))
      continue;
    const ActorId id = spawn_vehicle(world_, spec);
    world_.routes[id] = roam_->init_route(*map_, world_.actor(id), world_.rng);
    return true;
  }
  return false;
}

ResetResult Env::reset(std::uint64_t seed) {
  destroy_all(world_, seed);
  try {
    SpawnSpec ego_spec = cfg_.ego;
    ego_spec.role = Role::ego;
    ego_spec.controller = Controller::external;
    ego_ = spawn_vehicle(world_, ego_spec);
    Route route = ego_planner_->init_route(*map_, world_.actor(ego_), world_.rng);
    route.advance(world_.actor(ego_).pose.position);
    world_.routes[ego_] = std::move(route);

    for (SpawnSpec spec : cfg_.traffic.fixed) {
      spec.role = Role::background;
      const ActorId id = spawn_vehicle(world_, spec);
      world_.routes[id] = roam_->init_route(*map_, world_.actor(id), world_.rng);
    }
  } catch (const SimulationError& e) {
    throw ConfigError(std::string("task '") + cfg_.name + "': " + e.what());
  } catch (const PlanningError& e) {
    throw ConfigError(std::string("task '") + cfg_.name + "': " + e.what());
  }
  const int n = cfg_.traffic.count(cfg_.difficulty);
  for (int i = 0; i < n; ++i)
    if (!place_traffic(false))
      throw ConfigError("task '" + cfg_.name + "': could not place background vehicle " + std::to_string(i + 1) +
                        " of " + std::to_string(n) + " after 100 attempts");

  started_ = true;
  finished_ = false;
  ResetResult out;
  out.obs = observe();
  out.info.tick = world_.tick;
  out.info.sim_time = world_.sim_time();
  out.info.ego_speed = world_.actor(ego_).speed;
  out.info.actors = world_.actors.size();
  return out;
}

void Env::respawn_finished() {
  std::vector<ActorId> done;
  for (const auto& [id, v] : world_.actors) {
    if (id == ego_ || v.controller != Controller::autopilot) continue;
    auto it = world_.routes.find(id);
    if (it != world_.routes.end() && it->second.remaining() <= 2) done.push_back(id);
  }
  if (!cfg_.traffic.respawn || cfg_.traffic.spawn_lanes.empty()) return;
  for (ActorId id : done) {
    destroy_actor(world_, id);
    place_traffic(true);  // skipped silently when the entry is crowded
  }
}

ObservationBundle Env::observe() const { return observer_.collect(world_, ego_, cfg_.visibility, cfg_.intention); }

StepResult Env::step(const Action& raw) {
  if (!started_) throw ProtocolError("step called before reset");
  if (finished_) throw ProtocolError("step called after the episode ended; call reset");
  const Action a = raw.clamped();

  const WorldState prev = world_;
  tick(world_, Controls{{ego_, Control{a.throttle, a.steer_cmd}}});

  bool collided = false;
  for (const auto& [x, y] : detect_collisions(world_))
    if (x == ego_ || y == ego_) collided = true;

  Route& route = world_.routes.at(ego_);
  const std::size_t passed = ego_planner_->extend_route(*map_, world_.actor(ego_), route, world_.rng);
  for (auto& [id, r] : world_.routes)
    if (id != ego_) roam_->extend_route(*map_, world_.actor(id), r, world_.rng);
  respawn_finished();

  const Route& ego_route = world_.routes.at(ego_);
  const auto cause = check_termination(world_, ego_, ego_route, cfg_, collided);
  RewardEvents events;
  events.collided = collided;
  events.waypoints_reached = passed;
  events.destination = cause == TerminationCause::destination;
  events.out_of_lane = cause == TerminationCause::out_of_lane;
  events.signal = signal_compliance_reward(prev, world_, ego_, cfg_.reward);

  StepResult out;
  out.info.terms = compute_reward(world_, ego_, ego_route, cfg_.reward, events);
  out.info.cause = cause;
  out.info.tick = world_.tick;
  out.info.sim_time = world_.sim_time();
  out.info.ego_speed = world_.actor(ego_).speed;
  out.info.actors = world_.actors.size();
  out.reward = out.info.terms.total;
  out.truncated = cause == TerminationCause::timeout;
  out.terminated = cause.has_value() && !out.truncated;
  finished_ = cause.has_value();
  out.obs = observe();
  return out;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& agent_names() {
  static const std::vector<std::string> names{"autopilot", "random", "zero"};
  return names;
}

AgentFactory make_agent(const std::string& name) {
  if (name == "zero")
    return [](std::uint64_t) -> Agent { return [](const Env&, const ObservationBundle&) { return Action{}; }; };
  if (name == "random")
    return [](std::uint64_t seed) -> Agent {
      auto rng = std::make_shared<Rng>(seed ^ 0x9e3779b97f4a7c15ULL);
      return [rng](const Env&, const ObservationBundle&) {
        const double throttle = rng->uniform(-1.0, 1.0);
        return Action{throttle, rng->uniform(-1.0, 1.0)};
      };
    };
  if (name == "autopilot")
    return [](std::uint64_t) -> Agent {
      return [](const Env& env, const ObservationBundle&) {
        const Control c = autopilot_control(env.world(), env.ego(), env.config().ego_autopilot);
        return Action{c.throttle, c.steer_cmd};
      };
    };
  std::string list;
  for (const auto& n : agent_names()) list += (list.empty() ? "" : ", ") + n;
  throw ConfigError("unknown agent '" + name + "'; available: " + list);
}

namespace {

Stat mean_se(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) s.mean += x;
  s.mean /= n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

}  // namespace

EpisodeMetrics aggregate(const std::vector<EpisodeOutcome>& outcomes) {
  EpisodeMetrics m;
  m.episodes = outcomes.size();
  if (outcomes.empty()) return m;
  auto rate = [&](TerminationCause c) {
    std::vector<double> xs;
    for (const auto& o : outcomes) xs.push_back(o.cause == c ? 100.0 : 0.0);
    return mean_se(xs);
  };
  m.success_rate = rate(TerminationCause::destination);
  m.collision_rate = rate(TerminationCause::collision);
  m.out_of_lane_rate = rate(TerminationCause::out_of_lane);
  m.timeout_rate = rate(TerminationCause::timeout);

  std::vector<double> per_episode;
  double sum = 0.0;
  std::size_t steps = 0;
  for (const auto& o : outcomes) {
    per_episode.push_back(o.steps ? o.speed_sum / static_cast<double>(o.steps) : 0.0);
    sum += o.speed_sum;
    steps += o.steps;
  }
  m.avg_speed = mean_se(per_episode);
  m.avg_speed.mean = steps ? sum / static_cast<double>(steps) : 0.0;
  return m;
}

EpisodeOutcome run_episode(Env& env, const Agent& agent, std::uint64_t seed, const StepObserver& on_step) {
  EpisodeOutcome out;
  out.seed = seed;
  ResetResult r = env.reset(seed);
  ObservationBundle obs = std::move(r.obs);
  while (true) {
    StepResult s = env.step(agent(env, obs));
    ++out.steps;
    out.speed_sum += std::abs(s.info.ego_speed);
    out.total_reward += s.reward;
    if (on_step) on_step(env, s);
    if (s.info.cause) {
      out.cause = *s.info.cause;
      return out;
    }
    obs = std::move(s.obs);
  }
}

EpisodeMetrics evaluate(Env& env, const AgentFactory& agent, std::size_t episodes, std::uint64_t seed_base,
                        std::vector<EpisodeOutcome>* outcomes, const StepObserver& on_step) {
  if (episodes == 0) throw ConfigError("evaluate needs at least one episode");
  std::vector<EpisodeOutcome> all;
  for (std::size_t i = 0; i < episodes; ++i) {
    const std::uint64_t seed = seed_base + i;
    try {
      all.push_back(run_episode(env, agent(seed), seed, on_step));
    } catch (const std::exception& e) {
      throw Error("episode " + std::to_string(i) + " (seed " + std::to_string(seed) + "): " + e.what());
    }
  }
  if (outcomes) *outcomes = all;
  return aggregate(all);
}

}  // namespace drivelab
