#include "drivelab/task.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "drivelab/errors.hpp"

namespace drivelab {

using nlohmann::json;

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::simple: return "simple";
    case Difficulty::medium: return "medium";
    case Difficulty::hard: return "hard";
  }
  return "?";
}

std::string_view to_string(TerminationCause c) {
  switch (c) {
    case TerminationCause::destination: return "destination";
    case TerminationCause::collision: return "collision";
    case TerminationCause::out_of_lane: return "out_of_lane";
    case TerminationCause::timeout: return "timeout";
  }
  return "?";
}

std::optional<TerminationCause> parse_cause(std::string_view s) {
  for (auto c : {TerminationCause::destination, TerminationCause::collision, TerminationCause::out_of_lane,
                 TerminationCause::timeout})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

RewardTerms compute_reward(const WorldState& curr, ActorId ego, const Route& route, const RewardConfig& cfg,
                           const RewardEvents& events) {
  const VehicleState& v = curr.actor(ego);
  Vec2 g = unit_from_angle(v.pose.heading);
  if (!route.exhausted()) {
    const Vec2 d = route.waypoints[route.cursor] - v.pose.position;
    const double n = norm(d);
    if (n > 1e-12) g = d * (1.0 / n);
  }
  const Vec2 w = unit_from_angle(v.pose.heading) * v.speed;

  RewardTerms t;
  t.v_parallel = dot(w, g);
  t.v_perp = std::abs(cross(w, g));
  t.collision = events.collided ? 1 : 0;
  t.waypoints_reached = events.waypoints_reached;
  t.signal = events.signal;
  t.bonus_terms = cfg.waypoint_bonus * static_cast<double>(events.waypoints_reached) +
                  (events.destination ? cfg.destination_bonus : 0.0) -
                  (events.out_of_lane ? cfg.out_of_lane_penalty : 0.0) + events.signal;
  t.total = cfg.alpha * t.v_parallel - cfg.beta * t.v_perp - cfg.gamma * t.collision + t.bonus_terms;
  return t;
}

double signal_compliance_reward(const WorldState& prev, const WorldState& curr, ActorId ego,
                                const RewardConfig& cfg) {
  if (!curr.map || !prev.has_actor(ego) || !curr.has_actor(ego)) return 0.0;
  const Vec2 p0 = prev.actor(ego).pose.position;
  const Vec2 p1 = curr.actor(ego).pose.position;
  double out = 0.0;
  for (const Signal& sig : curr.map->signals()) {
    if (sig.kind != SignalKind::traffic_light || signal_phase(prev, sig) != SignalPhase::red) continue;
    const Lane& lane = curr.map->lane(sig.lane);
    const double s0 = project_onto_lane(lane, p0);
    if (distance(lane.point_at(s0), p0) > lane.width / 2.0) continue;
    const double s1 = project_onto_lane(lane, p1);
    if (s0 < sig.s && s1 >= sig.s) out -= cfg.gamma;
  }
  for (const auto& entry : curr.stops_completed)
    if (entry.first == ego && !prev.stops_completed.contains(entry)) out += cfg.waypoint_bonus;
  return out;
}

AutopilotConfig TrafficFlow::behavior_for(Difficulty d) const {
  if (behavior) return *behavior;
  if (d == Difficulty::hard) return {6.0, 10.0, Aggression::aggressive};
  return {5.0, 10.0, Aggression::lawful};
}

double lane_excess(const RoadMap& map, Vec2 p) {
  const LaneQuery q = map.lane_query(p);
  return q.distance() - map.lanes()[q.lane_index].width / 2.0;
}

std::optional<TerminationCause> check_termination(const WorldState& world, ActorId ego, const Route& route,
                                                  const TaskConfig& cfg, bool collided) {
  const VehicleState& v = world.actor(ego);
  if (collided) return TerminationCause::collision;
  if (lane_excess(*world.map, v.pose.position) > cfg.out_of_lane_limit) return TerminationCause::out_of_lane;
  const bool arrived = cfg.distance_budget ? v.odometer >= *cfg.distance_budget : route.exhausted();
  if (arrived) return TerminationCause::destination;
  if (world.sim_time() >= cfg.time_limit - 1e-9) return TerminationCause::timeout;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// registry

namespace {

SpawnSpec ego_at(std::string lane, double offset) {
  SpawnSpec s;
  s.lane = std::move(lane);
  s.offset = offset;
  s.role = Role::ego;
  return s;
}

TaskConfig intersection_task(std::string name, Vec2 goal, Difficulty d) {
  TaskConfig t;
  t.name = std::move(name);
  t.map = "intersection.map.json";
  t.ego = ego_at("s_in", 25.0);
  t.traffic.spawn_lanes = {"w_in", "n_in", "e_in"};
  t.planner = FixedEnding{goal};
  t.difficulty = d;
  return t;
}

std::map<std::string, TaskConfig> build_registry() {
  std::map<std::string, TaskConfig> reg;
  auto add = [&reg](TaskConfig t) { reg.emplace(t.name, std::move(t)); };

  const std::array<std::pair<const char*, Difficulty>, 3> levels{
      {{"simple", Difficulty::simple}, {"medium", Difficulty::medium}, {"hard", Difficulty::hard}}};
  for (const auto& [suffix, d] : levels) {
    add(intersection_task(std::string("right_turn_") + suffix, {42.0, -1.75}, d));
    add(intersection_task(std::string("left_turn_") + suffix, {-42.0, 1.75}, d));
  }

  {
    TaskConfig t;
    t.name = "lane_merge";
    t.map = "lane_merge.map.json";
    t.ego = ego_at("ramp_a", 5.0);
    t.traffic.spawn_lanes = {"main_a", "main_a_left"};
    t.planner = FixedEnding{{90.0, 0.0}};
    t.difficulty = Difficulty::medium;
    add(t);
  }
  {
    TaskConfig t;
    t.name = "overtake";
    t.map = "overtake.map.json";
    t.ego = ego_at("lane_0", 10.0);
    t.traffic.spawn_lanes = {"lane_1"};
    t.traffic.counts = {0, 2, 4};
    t.traffic.respawn = false;
    t.traffic.fixed.push_back({.lane = "lane_0",
                               .offset = 35.0,
                               .speed = 1.0,
                               .controller = Controller::autopilot,
                               .autopilot = AutopilotConfig{1.0, 10.0, Aggression::lawful}});
    t.planner = FixedEnding{{190.0, 0.0}};
    t.difficulty = Difficulty::medium;
    add(t);
  }
  {
    TaskConfig t;
    t.name = "four_lane";
    t.map = "four_lane.map.json";
    t.ego = ego_at("lane_0", 10.0);
    t.traffic.spawn_lanes = {"lane_0", "lane_1", "lane_2", "lane_3"};
    t.traffic.respawn = false;
    t.planner = FixedEnding{{200.0, 7.0}};
    t.difficulty = Difficulty::medium;
    add(t);
  }
  {
    TaskConfig t;
    t.name = "roundabout";
    t.map = "roundabout.map.json";
    t.ego = ego_at("s_in", 10.0);
    t.traffic.spawn_lanes = {"w_in", "n_in", "e_in"};
    t.planner = FixedEnding{{1.75, 70.0}};
    t.difficulty = Difficulty::medium;
    add(t);
  }
  {
    TaskConfig t;
    t.name = "navigation";
    t.map = "navigation.map.json";
    t.ego = ego_at("bottom_w", 5.0);
    t.traffic.spawn_lanes = {"right", "top_e", "top_w", "left"};
    t.traffic.respawn = false;
    t.planner = RandomRoam{};
    t.distance_budget = 200.0;
    t.difficulty = Difficulty::medium;
    add(t);
  }
  {
    TaskConfig t = intersection_task("traffic_lights", {1.75, 42.0}, Difficulty::medium);
    t.map = "intersection_lights.map.json";
    t.traffic.spawn_lanes = {"w_in", "e_in"};
    add(t);
  }
  {
    TaskConfig t = intersection_task("stop_sign", {1.75, 42.0}, Difficulty::medium);
    t.map = "intersection_stop.map.json";
    t.traffic.spawn_lanes = {"w_in", "e_in"};
    t.traffic.counts = {0, 2, 4};
    add(t);
  }
  return reg;
}

const std::map<std::string, TaskConfig>& registry() {
  static const auto reg = build_registry();
  return reg;
}

// ---------------------------------------------------------------------------
// JSON mapping used for overrides

template <class E>
struct EnumNames;

template <>
struct EnumNames<Difficulty> {
  static constexpr std::array<std::pair<Difficulty, const char*>, 3> values{
      {{Difficulty::simple, "simple"}, {Difficulty::medium, "medium"}, {Difficulty::hard, "hard"}}};
};
template <>
struct EnumNames<VisibilityMode> {
  static constexpr std::array<std::pair<VisibilityMode, const char*>, 3> values{
      {{VisibilityMode::fov, "FOV"}, {VisibilityMode::sfov, "SFOV"}, {VisibilityMode::full, "FULL"}}};
};
template <>
struct EnumNames<IntentionScope> {
  static constexpr std::array<std::pair<IntentionScope, const char*>, 2> values{
      {{IntentionScope::visible_only, "visible_only"}, {IntentionScope::all, "all"}}};
};
template <>
struct EnumNames<Aggression> {
  static constexpr std::array<std::pair<Aggression, const char*>, 2> values{
      {{Aggression::lawful, "lawful"}, {Aggression::aggressive, "aggressive"}}};
};
template <>
struct EnumNames<Controller> {
  static constexpr std::array<std::pair<Controller, const char*>, 2> values{
      {{Controller::external, "external"}, {Controller::autopilot, "autopilot"}}};
};

template <class E>
json enum_json(E e) {
  for (const auto& [v, n] : EnumNames<E>::values)
    if (v == e) return n;
  return nullptr;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

template <class E>
E enum_from(const json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string s = lower(j.get<std::string>());
    for (const auto& [v, n] : EnumNames<E>::values)
      if (lower(n) == s) return v;
  }
  std::string allowed;
  for (const auto& [v, n] : EnumNames<E>::values) allowed += std::string(allowed.empty() ? "" : ", ") + n;
  throw ConfigError(path + ": expected one of " + allowed + ", got " + j.dump());
}

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

// Strict reader: every key must be consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, _] : j_.items())
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end())
        throw ConfigError("unknown field '" + join(k) + "'");
  }

  const json& at(const std::string& key) {
    seen_.push_back(key);
    if (!j_.contains(key)) throw ConfigError("missing field '" + join(key) + "'");
    return j_.at(key);
  }
  bool has(const std::string& key) const { return j_.contains(key); }

  double num(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(join(key) + ": expected a number");
    return v.get<double>();
  }
  int integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(join(key) + ": expected an integer");
    return v.get<int>();
  }
  bool boolean(const std::string& key) {
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError(join(key) + ": expected a boolean");
    return v.get<bool>();
  }
  std::string str(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(join(key) + ": expected a string");
    return v.get<std::string>();
  }
  Vec2 vec(const std::string& key) { return to_vec(at(key), join(key)); }
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  static Vec2 to_vec(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ConfigError(path + ": expected [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }
  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

json autopilot_json(const AutopilotConfig& a) {
  return {{"target_speed", a.target_speed}, {"headway_distance", a.headway_distance},
          {"aggression", enum_json(a.aggression)}};
}

AutopilotConfig autopilot_from(const json& j, const std::string& path) {
  Reader r(j, path);
  AutopilotConfig a;
  a.target_speed = r.num("target_speed");
  a.headway_distance = r.num("headway_distance");
  a.aggression = enum_from<Aggression>(r.at("aggression"), r.join("aggression"));
  return a;
}

json spawn_json(const SpawnSpec& s) {
  json j = {{"lane", s.lane},
            {"offset", s.offset},
            {"speed", s.speed},
            {"controller", enum_json(s.controller)},
            {"blueprint", {{"length", s.blueprint.length}, {"width", s.blueprint.width}}},
            {"autopilot", s.autopilot ? autopilot_json(*s.autopilot) : json(nullptr)}};
  return j;
}

SpawnSpec spawn_from(const json& j, const std::string& path, Role role) {
  Reader r(j, path);
  SpawnSpec s;
  s.role = role;
  s.lane = r.str("lane");
  s.offset = r.num("offset");
  s.speed = r.num("speed");
  s.controller = enum_from<Controller>(r.at("controller"), r.join("controller"));
  {
    Reader b(r.at("blueprint"), r.join("blueprint"));
    s.blueprint.length = b.num("length");
    s.blueprint.width = b.num("width");
  }
  if (const json& a = r.at("autopilot"); !a.is_null()) s.autopilot = autopilot_from(a, r.join("autopilot"));
  return s;
}

json planner_json(const PlannerKind& p) {
  json j = {{"kind", planner_name(p)}};
  if (const auto* fp = std::get_if<FixedPath>(&p)) {
    j["points"] = json::array();
    for (Vec2 v : fp->points) j["points"].push_back(vec_json(v));
  } else if (const auto* fe = std::get_if<FixedEnding>(&p)) {
    j["goal"] = vec_json(fe->goal);
  }
  return j;
}

PlannerKind planner_from(const json& j, const std::string& path) {
  Reader r(j, path);
  const std::string kind = r.str("kind");
  if (kind == "random_roam") return RandomRoam{};
  if (kind == "fixed_ending") return FixedEnding{r.vec("goal")};
  if (kind == "fixed_path") {
    FixedPath fp;
    const json& pts = r.at("points");
    if (!pts.is_array()) throw ConfigError(r.join("points") + ": expected an array");
    for (const json& p : pts) fp.points.push_back(Reader::to_vec(p, r.join("points")));
    return fp;
  }
  throw ConfigError(r.join("kind") + ": unknown planner '" + kind + "'");
}

json config_json(const TaskConfig& t) {
  json traffic = {{"spawn_lanes", t.traffic.spawn_lanes},
                  {"counts", {{"simple", t.traffic.counts[0]}, {"medium", t.traffic.counts[1]},
                              {"hard", t.traffic.counts[2]}}},
                  {"respawn", t.traffic.respawn},
                  {"behavior", t.traffic.behavior ? autopilot_json(*t.traffic.behavior) : json(nullptr)},
                  {"fixed", json::array()},
                  {"min_clearance", t.traffic.min_clearance}};
  for (const SpawnSpec& s : t.traffic.fixed) traffic["fixed"].push_back(spawn_json(s));
  return {
      {"name", t.name},
      {"map", t.map},
      {"ego", spawn_json(t.ego)},
      {"traffic", traffic},
      {"planner", planner_json(t.planner)},
      {"difficulty", enum_json(t.difficulty)},
      {"visibility",
       {{"mode", enum_json(t.visibility.mode)},
        {"cone_half_angle", t.visibility.cone_half_angle},
        {"range", t.visibility.range}}},
      {"intention",
       {{"enabled", t.intention.enabled},
        {"shared_waypoints", t.intention.shared_waypoints},
        {"scope", enum_json(t.intention.scope)}}},
      {"modalities", t.modalities},
      {"display", t.display},
      {"reward",
       {{"alpha", t.reward.alpha},
        {"beta", t.reward.beta},
        {"gamma", t.reward.gamma},
        {"waypoint_bonus", t.reward.waypoint_bonus},
        {"out_of_lane_penalty", t.reward.out_of_lane_penalty},
        {"destination_bonus", t.reward.destination_bonus}}},
      {"time_limit", t.time_limit},
      {"out_of_lane_limit", t.out_of_lane_limit},
      {"distance_budget", t.distance_budget ? json(*t.distance_budget) : json(nullptr)},
      {"ego_autopilot", autopilot_json(t.ego_autopilot)},
      {"bev", {{"size", t.bev.size}, {"resolution", t.bev.resolution}}},
      {"lidar", {{"beams", t.lidar.beams}, {"max_range", t.lidar.max_range}}},
      {"dynamics",
       {{"dt", t.dynamics.dt},
        {"max_accel", t.dynamics.max_accel},
        {"max_speed", t.dynamics.max_speed},
        {"min_speed", t.dynamics.min_speed},
        {"max_steer", t.dynamics.max_steer},
        {"wheelbase_ratio", t.dynamics.wheelbase_ratio}}},
  };
}

std::vector<std::string> string_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of strings");
  std::vector<std::string> out;
  for (const json& e : j) {
    if (!e.is_string()) throw ConfigError(path + ": expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

TaskConfig config_from(const json& j) {
  Reader r(j, "");
  TaskConfig t;
  t.name = r.str("name");
  t.map = r.str("map");
  t.ego = spawn_from(r.at("ego"), "ego", Role::ego);
  {
    Reader tr(r.at("traffic"), "traffic");
    t.traffic.spawn_lanes = string_list(tr.at("spawn_lanes"), "traffic.spawn_lanes");
    {
      Reader c(tr.at("counts"), "traffic.counts");
      t.traffic.counts = {c.integer("simple"), c.integer("medium"), c.integer("hard")};
    }
    t.traffic.respawn = tr.boolean("respawn");
    if (const json& b = tr.at("behavior"); !b.is_null()) t.traffic.behavior = autopilot_from(b, "traffic.behavior");
    const json& fixed = tr.at("fixed");
    if (!fixed.is_array()) throw ConfigError("traffic.fixed: expected an array");
    for (const json& f : fixed) t.traffic.fixed.push_back(spawn_from(f, "traffic.fixed", Role::background));
    t.traffic.min_clearance = tr.num("min_clearance");
  }
  t.planner = planner_from(r.at("planner"), "planner");
  t.difficulty = enum_from<Difficulty>(r.at("difficulty"), "difficulty");
  {
    Reader v(r.at("visibility"), "visibility");
    t.visibility.mode = enum_from<VisibilityMode>(v.at("mode"), "visibility.mode");
    t.visibility.cone_half_angle = v.num("cone_half_angle");
    t.visibility.range = v.num("range");
  }
  {
    Reader i(r.at("intention"), "intention");
    t.intention.enabled = i.boolean("enabled");
    const int k = i.integer("shared_waypoints");
    if (k < 1) throw ConfigError("intention.shared_waypoints must be >= 1");
    t.intention.shared_waypoints = static_cast<std::size_t>(k);
    t.intention.scope = enum_from<IntentionScope>(i.at("scope"), "intention.scope");
  }
  t.modalities = string_list(r.at("modalities"), "modalities");
  t.display = r.str("display");
  {
    Reader w(r.at("reward"), "reward");
    t.reward.alpha = w.num("alpha");
    t.reward.beta = w.num("beta");
    t.reward.gamma = w.num("gamma");
    t.reward.waypoint_bonus = w.num("waypoint_bonus");
    t.reward.out_of_lane_penalty = w.num("out_of_lane_penalty");
    t.reward.destination_bonus = w.num("destination_bonus");
  }
  t.time_limit = r.num("time_limit");
  t.out_of_lane_limit = r.num("out_of_lane_limit");
  if (const json& d = r.at("distance_budget"); !d.is_null()) {
    if (!d.is_number()) throw ConfigError("distance_budget: expected a number or null");
    t.distance_budget = d.get<double>();
  }
  t.ego_autopilot = autopilot_from(r.at("ego_autopilot"), "ego_autopilot");
  {
    Reader b(r.at("bev"), "bev");
    t.bev.size = b.integer("size");
    t.bev.resolution = b.num("resolution");
  }
  {
    Reader l(r.at("lidar"), "lidar");
    t.lidar.beams = l.integer("beams");
    t.lidar.max_range = l.num("max_range");
  }
  {
    Reader d(r.at("dynamics"), "dynamics");
    t.dynamics.dt = d.num("dt");
    t.dynamics.max_accel = d.num("max_accel");
    t.dynamics.max_speed = d.num("max_speed");
    t.dynamics.min_speed = d.num("min_speed");
    t.dynamics.max_steer = d.num("max_steer");
    t.dynamics.wheelbase_ratio = d.num("wheelbase_ratio");
  }
  return t;
}

void apply_override(json& doc, const std::string& key, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  std::string path;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    path += (path.empty() ? "" : ".") + part;
    if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown field '" + path + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  // planners and nullable sub-objects are replaced wholesale
  if (value.is_object() && node->is_object() && path != "planner") {
    for (const auto& [k, v] : value.items()) apply_override(doc, path + "." + k, v);
  } else {
    *node = value;
  }
}

}  // namespace

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [n, _] : registry()) out.push_back(n);
    return out;
  }();
  return names;
}

TaskConfig make_task(const std::string& name, const json& overrides) {
  auto it = registry().find(name);
  if (it == registry().end()) {
    std::string list;
    for (const auto& n : task_names()) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("unknown task '" + name + "'; registered tasks: " + list);
  }
  if (overrides.is_null() || (overrides.is_object() && overrides.empty())) return it->second;
  if (!overrides.is_object()) throw ConfigError("overrides must be a JSON object");
  json doc = config_json(it->second);
  for (const auto& [k, v] : overrides.items()) apply_override(doc, k, v);
  TaskConfig t = config_from(doc);
  validate_task(t);
  return t;
}

json task_to_json(const TaskConfig& cfg) { return config_json(cfg); }

TaskConfig task_from_json(const json& doc) {
  TaskConfig t = config_from(doc);
  validate_task(t);
  return t;
}

void validate_task(const TaskConfig& t) {
  for (const auto& m : t.modalities)
    if (std::find(builtin_handler_names().begin(), builtin_handler_names().end(), m) ==
        builtin_handler_names().end())
      throw ConfigError("modality '" + m + "' is not a registered data handler");
  if (!t.display.empty() && std::find(t.modalities.begin(), t.modalities.end(), t.display) == t.modalities.end())
    throw ConfigError("display modality '" + t.display + "' is not among the task modalities");
  if (!(t.visibility.cone_half_angle > 0.0 && t.visibility.cone_half_angle <= std::numbers::pi))
    throw ConfigError("visibility.cone_half_angle must be in (0, pi]");
  if (!(t.visibility.range > 0.0)) throw ConfigError("visibility.range must be positive");
  if (t.bev.size <= 0 || t.bev.size % 2 != 0 || !(t.bev.resolution > 0.0))
    throw ConfigError("bev needs an even positive size and positive resolution");
  if (t.lidar.beams < 1 || !(t.lidar.max_range > 0.0)) throw ConfigError("lidar needs >= 1 beam and positive range");
  if (!(t.reward.alpha >= 0.0 && t.reward.beta >= 0.0 && t.reward.gamma >= 0.0))
    throw ConfigError("reward alpha, beta and gamma must be >= 0");
  if (std::any_of(t.traffic.counts.begin(), t.traffic.counts.end(), [](int c) { return c < 0; }))
    throw ConfigError("traffic counts must be >= 0");
  if (t.traffic.count(t.difficulty) > 0 && t.traffic.spawn_lanes.empty())
    throw ConfigError("traffic needs spawn lanes");
  if (!(t.time_limit > 0.0)) throw ConfigError("time_limit must be positive");
  if (!(t.dynamics.dt > 0.0)) throw ConfigError("dynamics.dt must be positive");
  if (const auto* fp = std::get_if<FixedPath>(&t.planner); fp && fp->points.size() < 2)
    throw ConfigError("fixed_path planner needs at least 2 points");
  if (!std::filesystem::exists(resolve_map_path(t.map))) throw ConfigError("map '" + t.map + "' not found");
}

}  // namespace drivelab
