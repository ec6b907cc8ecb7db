#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "drivelab/env.hpp"

namespace drivelab {

struct StepRecord {
  std::uint64_t tick = 0;
  Action action;  // as applied, after clamping
  RewardTerms terms;
  Pose pose;
  double speed = 0.0;
  std::optional<TerminationCause> cause;
};

/// Header carries the full task config so a log replays without the
/// registry that produced it.
struct EpisodeLog {
  std::string task;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
};

EpisodeLog record_episode(Env& env, const Agent& agent, std::uint64_t seed);

/// Records `episodes` episodes with seeds seed_base.. and streams them to
/// sink as JSON lines. Throws Error on sink failure.
std::vector<EpisodeLog> record_rollouts(Env& env, const AgentFactory& agent, std::size_t episodes,
                                        std::uint64_t seed_base, std::ostream& sink);

void write_log(std::ostream& out, const EpisodeLog& log);
/// Parses every episode in a JSON-lines stream. Throws Error naming the line.
std::vector<EpisodeLog> read_logs(std::istream& in);

struct ReplayMismatch {
  std::size_t episode = 0;
  std::size_t step = 0;  // 0-based step index within the episode
  std::string field;
  std::string expected;
  std::string actual;
  std::string message() const;
};

/// Feeds the logged actions into a fresh environment and compares every
/// record bitwise. Returns the first mismatch.
std::optional<ReplayMismatch> replay(const EpisodeLog& log, std::size_t episode_index = 0);

}  // namespace drivelab
