#include "drivelab/rollout.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "drivelab/errors.hpp"
#include "drivelab/protocol.hpp"

namespace drivelab {

using nlohmann::json;

EpisodeLog record_episode(Env& env, const Agent& agent, std::uint64_t seed) {
  EpisodeLog log;
  log.task = env.config().name;
  log.config = task_to_json(env.config());
  log.seed = seed;
  ResetResult r = env.reset(seed);
  ObservationBundle obs = std::move(r.obs);
  while (true) {
    const Action action = agent(env, obs).clamped();
    StepResult s = env.step(action);
    const VehicleState& ego = env.world().actor(env.ego());
    log.steps.push_back({s.info.tick, action, s.info.terms, ego.pose, ego.speed, s.info.cause});
    if (s.info.cause) return log;
    obs = std::move(s.obs);
  }
}

std::vector<EpisodeLog> record_rollouts(Env& env, const AgentFactory& agent, std::size_t episodes,
                                        std::uint64_t seed_base, std::ostream& sink) {
  std::vector<EpisodeLog> logs;
  for (std::size_t i = 0; i < episodes; ++i) {
    const std::uint64_t seed = seed_base + i;
    logs.push_back(record_episode(env, agent(seed), seed));
    write_log(sink, logs.back());
    sink.flush();
    if (!sink) throw Error("rollout sink write failed at episode " + std::to_string(i));
  }
  return logs;
}

void write_log(std::ostream& out, const EpisodeLog& log) {
  out << json{{"type", "episode"}, {"task", log.task}, {"seed", log.seed}, {"steps", log.steps.size()},
              {"config", log.config}}
             .dump()
      << '\n';
  for (const StepRecord& s : log.steps) {
    out << json{{"type", "step"},
                {"tick", s.tick},
                {"action", {s.action.throttle, s.action.steer_cmd}},
                {"reward", terms_json(s.terms)},
                {"pose", {s.pose.position.x, s.pose.position.y, s.pose.heading}},
                {"speed", s.speed},
                {"cause", s.cause ? json(std::string(to_string(*s.cause))) : json(nullptr)}}
               .dump()
        << '\n';
  }
}

namespace {

RewardTerms terms_from(const json& j) {
  RewardTerms t;
  t.v_parallel = j.at("v_parallel").get<double>();
  t.v_perp = j.at("v_perp").get<double>();
  t.collision = j.at("collision").get<int>();
  t.waypoints_reached = j.at("waypoints_reached").get<std::size_t>();
  t.signal = j.at("signal").get<double>();
  t.bonus_terms = j.at("bonus_terms").get<double>();
  t.total = j.at("total").get<double>();
  return t;
}

std::optional<TerminationCause> cause_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  auto c = parse_cause(j.get<std::string>());
  if (!c) throw Error("unknown termination cause " + j.dump());
  return c;
}

}  // namespace

std::vector<EpisodeLog> read_logs(std::istream& in) {
  std::vector<EpisodeLog> logs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "episode") {
        EpisodeLog log;
        log.task = j.at("task").get<std::string>();
        log.seed = j.at("seed").get<std::uint64_t>();
        log.config = j.at("config");
        logs.push_back(std::move(log));
      } else if (type == "step") {
        if (logs.empty()) throw Error("step record before any episode header");
        StepRecord s;
        s.tick = j.at("tick").get<std::uint64_t>();
        s.action = {j.at("action").at(0).get<double>(), j.at("action").at(1).get<double>()};
        s.terms = terms_from(j.at("reward"));
        const json& pose = j.at("pose");
        s.pose = {{pose.at(0).get<double>(), pose.at(1).get<double>()}, pose.at(2).get<double>()};
        s.speed = j.at("speed").get<double>();
        s.cause = cause_from(j.at("cause"));
        logs.back().steps.push_back(s);
      } else {
        throw Error("unknown record type '" + type + "'");
      }
    } catch (const std::exception& e) {
      throw Error("log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return logs;
}

std::string ReplayMismatch::message() const {
  return "episode " + std::to_string(episode) + " step " + std::to_string(step) + ": " + field + " expected " +
         expected + ", replay produced " + actual;
}

namespace {

std::string show(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

bool same(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

}  // namespace

std::optional<ReplayMismatch> replay(const EpisodeLog& log, std::size_t episode_index) {
  Env env(task_from_json(log.config));
  env.reset(log.seed);
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    const StepRecord& want = log.steps[i];
    auto mismatch = [&](std::string field, std::string expected, std::string actual) {
      return ReplayMismatch{episode_index, i, std::move(field), std::move(expected), std::move(actual)};
    };
    if (!env.episode_active()) return mismatch("episode", "active", "ended");
    const StepResult got = env.step(want.action);
    const VehicleState& ego = env.world().actor(env.ego());
    if (got.info.tick != want.tick) return mismatch("tick", std::to_string(want.tick), std::to_string(got.info.tick));
    const std::pair<const char*, std::pair<double, double>> doubles[] = {
        {"reward.total", {want.terms.total, got.info.terms.total}},
        {"reward.v_parallel", {want.terms.v_parallel, got.info.terms.v_parallel}},
        {"reward.v_perp", {want.terms.v_perp, got.info.terms.v_perp}},
        {"reward.signal", {want.terms.signal, got.info.terms.signal}},
        {"reward.bonus_terms", {want.terms.bonus_terms, got.info.terms.bonus_terms}},
        {"pose.x", {want.pose.position.x, ego.pose.position.x}},
        {"pose.y", {want.pose.position.y, ego.pose.position.y}},
        {"pose.heading", {want.pose.heading, ego.pose.heading}},
        {"speed", {want.speed, ego.speed}},
    };
    for (const auto& [field, v] : doubles)
      if (!same(v.first, v.second)) return mismatch(field, show(v.first), show(v.second));
    if (got.info.terms.collision != want.terms.collision)
      return mismatch("reward.collision", std::to_string(want.terms.collision),
                      std::to_string(got.info.terms.collision));
    if (got.info.terms.waypoints_reached != want.terms.waypoints_reached)
      return mismatch("reward.waypoints_reached", std::to_string(want.terms.waypoints_reached),
                      std::to_string(got.info.terms.waypoints_reached));
    auto cause_text = [](const std::optional<TerminationCause>& c) {
      return c ? std::string(to_string(*c)) : std::string("none");
    };
    if (got.info.cause != want.cause) return mismatch("cause", cause_text(want.cause), cause_text(got.info.cause));
  }
  if (env.episode_active()) return ReplayMismatch{episode_index, log.steps.size(), "episode", "ended", "active"};
  return std::nullopt;
}

}  // namespace drivelab
