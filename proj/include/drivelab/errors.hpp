#pragma once

#include <stdexcept>
#include <string>

namespace drivelab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent map document.
struct MapError : Error {
  MapError(std::string lane, const std::string& what)
      : Error(lane.empty() ? what : "lane '" + lane + "': " + what), lane_id(std::move(lane)) {}
  std::string lane_id;
};

/// Invalid spawn, task or environment configuration.
struct ConfigError : Error {
  using Error::Error;
};

/// Precondition of a simulation call violated (unknown actor, overlap...).
struct SimulationError : Error {
  using Error::Error;
};

struct PlanningError : Error {
  using Error::Error;
};

/// Episode protocol misuse (step before reset, step after terminal...).
struct ProtocolError : Error {
  using Error::Error;
};

}  // namespace drivelab
