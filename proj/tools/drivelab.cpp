// drivelab command line: run, evaluate, record, replay, map-validate, serve.
// Exit codes: 0 success, 1 runtime or verification failure, 2 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "drivelab/env.hpp"
#include "drivelab/errors.hpp"
#include "drivelab/protocol.hpp"
#include "drivelab/road_map.hpp"
#include "drivelab/rollout.hpp"
#include "drivelab/viz.hpp"

namespace {

using namespace drivelab;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ", ") + x;
  return out;
}

void require_task(const std::string& task) {
  const auto& names = task_names();
  if (std::find(names.begin(), names.end(), task) == names.end())
    throw UsageError("unknown task '" + task + "'; valid tasks: " + join(names));
}

AgentFactory require_agent(const std::string& agent) {
  const auto& names = agent_names();
  if (std::find(names.begin(), names.end(), agent) == names.end())
    throw UsageError("unknown agent '" + agent + "'; valid agents: " + join(names) + ", external");
  return make_agent(agent);
}

json parse_overrides(const std::string& text) {
  if (text.empty()) return json::object();
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw UsageError("--overrides must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("--overrides is not valid JSON: ") + e.what());
  }
}

TaskConfig build_task(const std::string& task, const std::string& overrides) {
  require_task(task);
  try {
    return make_task(task, parse_overrides(overrides));
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

void wait_for_interrupt() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

std::optional<std::uint16_t> viz_port(const std::optional<int>& flag) {
  if (flag) return static_cast<std::uint16_t>(*flag);
  if (const char* env = std::getenv("DRIVELAB_VIZ_PORT"); env && *env) {
    try {
      return static_cast<std::uint16_t>(std::stoi(env));
    } catch (const std::exception&) {
      throw UsageError(std::string("DRIVELAB_VIZ_PORT is not a port: ") + env);
    }
  }
  return std::nullopt;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// --------------------------------------------------------------------------

struct RunOptions {
  std::string task, agent, overrides, serve, viz_host = "127.0.0.1", assets;
  std::size_t episodes = 1;
  std::uint64_t seed = 0;
  std::optional<int> viz;
};

int cmd_run(const RunOptions& o) {
  TaskConfig cfg = build_task(o.task, o.overrides);
  const bool external = o.agent == "external";
  AgentFactory agent;
  if (!external) agent = require_agent(o.agent);
  if (external && o.serve.empty()) throw UsageError("agent 'external' needs --serve host:port");

  std::unique_ptr<WireServer> wire;
  if (!o.serve.empty()) {
    const auto [host, port] = parse_address(o.serve);
    wire = std::make_unique<WireServer>(host, port);
    wire->start();
    std::cerr << "wire protocol on " << host << ":" << wire->port() << "\n";
  }

  std::unique_ptr<VizServer> viz;
  StepObserver publish;
  if (auto port = viz_port(o.viz)) {
    viz = std::make_unique<VizServer>(o.viz_host, *port,
                                      o.assets.empty() ? std::nullopt : std::optional<std::filesystem::path>(o.assets));
    viz->start();
    publish = make_publisher(viz->mailbox(), std::make_shared<TelemetryTracker>());
    std::cerr << "viz server on http://" << o.viz_host << ":" << viz->port() << "/\n";
  }

  if (external) {
    wait_for_interrupt();
    return kOk;
  }

  Env env(cfg);
  for (std::size_t i = 0; i < o.episodes; ++i) {
    const std::uint64_t seed = o.seed + i;
    const EpisodeOutcome out = run_episode(env, agent(seed), seed, publish);
    std::cout << "episode " << i << " seed " << seed << ": " << to_string(out.cause) << " steps " << out.steps
              << " return " << fmt("%.3f", out.total_reward) << " avg_speed "
              << fmt("%.3f", out.steps ? out.speed_sum / static_cast<double>(out.steps) : 0.0) << "\n";
  }
  return kOk;
}

struct EvalOptions {
  std::string task, agent, overrides, format = "table";
  std::size_t episodes = 20;
  std::uint64_t seed = 0;
};

int cmd_evaluate(const EvalOptions& o) {
  TaskConfig cfg = build_task(o.task, o.overrides);
  AgentFactory agent = require_agent(o.agent);
  Env env(cfg);
  const EpisodeMetrics m = evaluate(env, agent, o.episodes, o.seed);

  if (o.format == "csv") {
    std::cout << "task,success_rate,success_se,collision_rate,collision_se,avg_speed,avg_speed_se\n"
              << o.task << "," << fmt("%.4f", m.success_rate.mean) << "," << fmt("%.4f", m.success_rate.se) << ","
              << fmt("%.4f", m.collision_rate.mean) << "," << fmt("%.4f", m.collision_rate.se) << ","
              << fmt("%.4f", m.avg_speed.mean) << "," << fmt("%.4f", m.avg_speed.se) << "\n";
  } else if (o.format == "json") {
    json j = metrics_json(m);
    j["task"] = o.task;
    j["agent"] = o.agent;
    j["seed"] = o.seed;
    std::cout << j.dump(2) << "\n";
  } else {
    auto pct = [](const Stat& s) { return fmt("%.2f", s.mean) + " ± " + fmt("%.2f", s.se) + "%"; };
    auto spd = [](const Stat& s) { return fmt("%.2f", s.mean) + " ± " + fmt("%.2f", s.se); };
    std::printf("%-20s %-18s %-18s %-18s\n", "Task", "Success Rate", "Collision Rate", "Avg. Speed (m/s)");
    std::printf("%-20s %-19s %-19s %-18s\n", o.task.c_str(), pct(m.success_rate).c_str(),
                pct(m.collision_rate).c_str(), spd(m.avg_speed).c_str());
    std::printf("(%zu episodes, agent %s, seeds %llu..%llu; out of lane %.2f%%, timeout %.2f%%)\n", m.episodes,
                o.agent.c_str(), static_cast<unsigned long long>(o.seed),
                static_cast<unsigned long long>(o.seed + o.episodes - 1), m.out_of_lane_rate.mean,
                m.timeout_rate.mean);
  }
  return kOk;
}

int cmd_record(const std::string& task, const std::string& agent_name, std::size_t episodes,
               const std::string& out_path, std::uint64_t seed, const std::string& overrides) {
  TaskConfig cfg = build_task(task, overrides);
  AgentFactory agent = require_agent(agent_name);
  std::ofstream out(out_path);
  if (!out) throw Error("cannot open " + out_path + " for writing");
  Env env(cfg);
  const auto logs = record_rollouts(env, agent, episodes, seed, out);
  for (std::size_t i = 0; i < logs.size(); ++i)
    std::cout << "episode " << i << " seed " << logs[i].seed << ": " << logs[i].steps.size() << " steps, "
              << (logs[i].steps.empty() || !logs[i].steps.back().cause ? "unfinished"
                                                                         : to_string(*logs[i].steps.back().cause))
              << "\n";
  std::cout << "wrote " << logs.size() << " episodes to " << out_path << "\n";
  return kOk;
}

int cmd_replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  const auto logs = read_logs(in);
  std::size_t steps = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    if (auto mismatch = replay(logs[i], i)) {
      std::cout << "MISMATCH " << mismatch->message() << "\n";
      return kFailure;
    }
    steps += logs[i].steps.size();
  }
  std::cout << "replayed " << logs.size() << " episodes, " << steps << " steps: all records match\n";
  return kOk;
}

int cmd_map_validate(std::vector<std::string> paths) {
  if (paths.empty())
    for (const auto& entry : std::filesystem::directory_iterator(default_map_dir()))
      if (entry.path().string().ends_with(".map.json")) paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  int rc = kOk;
  for (const auto& p : paths) {
    try {
      const RoadMap map = load_map_file(resolve_map_path(p));
      std::cout << "ok   " << p << " (" << map.lanes().size() << " lanes, " << map.signals().size() << " signals)\n";
    } catch (const std::exception& e) {
      std::cout << "FAIL " << p << ": " << e.what() << "\n";
      rc = kFailure;
    }
  }
  return rc;
}

int cmd_serve(const std::string& wire_addr, const std::optional<int>& viz, const std::string& viz_host) {
  const auto [host, port] = parse_address(wire_addr);
  WireServer wire(host, port);
  wire.start();
  std::cerr << "wire protocol on " << host << ":" << wire.port() << "\n";
  std::unique_ptr<VizServer> vs;
  if (auto vp = viz_port(viz)) {
    vs = std::make_unique<VizServer>(viz_host, *vp);
    vs->start();
    std::cerr << "viz server on http://" << viz_host << ":" << vs->port() << "/\n";
  }
  wait_for_interrupt();
  wire.stop();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drivelab: deterministic 2D driving tasks for RL agents"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "run episodes and print one outcome line per episode");
  run_cmd->add_option("task", run.task, "task name")->required();
  run.agent = "autopilot";
  run_cmd->add_option("agent", run.agent, "autopilot, random, zero or external (default autopilot)");
  run_cmd->add_option("episodes", run.episodes, "episode count")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run.seed, "seed of the first episode");
  run_cmd->add_option("--overrides", run.overrides, "JSON object of task overrides");
  run_cmd->add_option("--viz", run.viz, "serve the visualization on this port");
  run_cmd->add_option("--viz-host", run.viz_host, "visualization bind host");
  run_cmd->add_option("--assets", run.assets, "directory with dashboard assets");
  run_cmd->add_option("--serve", run.serve, "also serve the wire protocol on host:port");

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate an agent and print the metrics table");
  eval_cmd->add_option("task", ev.task, "task name")->required();
  eval_cmd->add_option("agent", ev.agent, "autopilot, random or zero")->required();
  eval_cmd->add_option("episodes", ev.episodes, "episode count")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", ev.seed, "seed of the first episode");
  eval_cmd->add_option("--format", ev.format, "table, csv or json")->check(CLI::IsMember({"table", "csv", "json"}));
  eval_cmd->add_option("--overrides", ev.overrides, "JSON object of task overrides");

  std::string rec_task, rec_agent, rec_out, rec_overrides;
  std::size_t rec_episodes = 1;
  std::uint64_t rec_seed = 0;
  auto* rec_cmd = app.add_subcommand("record", "record episodes as JSON lines");
  rec_cmd->add_option("task", rec_task, "task name")->required();
  rec_cmd->add_option("agent", rec_agent, "autopilot, random or zero")->required();
  rec_cmd->add_option("episodes", rec_episodes, "episode count")->required();
  rec_cmd->add_option("out", rec_out, "output path")->required();
  rec_cmd->add_option("--seed", rec_seed, "seed of the first episode");
  rec_cmd->add_option("--overrides", rec_overrides, "JSON object of task overrides");

  std::string replay_path;
  auto* replay_cmd = app.add_subcommand("replay", "replay a recorded log and verify every step");
  replay_cmd->add_option("log", replay_path, "log path")->required();

  std::vector<std::string> map_paths;
  auto* maps_cmd = app.add_subcommand("map-validate", "validate map files (default: all built-in maps)");
  maps_cmd->add_option("paths", map_paths, "map files");

  std::string wire_addr = "127.0.0.1:5555", serve_viz_host = "127.0.0.1";
  std::optional<int> serve_viz;
  auto* serve_cmd = app.add_subcommand("serve", "serve the wire protocol");
  serve_cmd->add_option("--wire", wire_addr, "host:port for the JSON protocol");
  serve_cmd->add_option("--viz", serve_viz, "also start the visualization server on this port");
  serve_cmd->add_option("--viz-host", serve_viz_host, "visualization bind host");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*eval_cmd) return cmd_evaluate(ev);
    if (*rec_cmd) return cmd_record(rec_task, rec_agent, rec_episodes, rec_out, rec_seed, rec_overrides);
    if (*replay_cmd) return cmd_replay(replay_path);
    if (*maps_cmd) return cmd_map_validate(map_paths);
    if (*serve_cmd) return cmd_serve(wire_addr, serve_viz, serve_viz_host);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
