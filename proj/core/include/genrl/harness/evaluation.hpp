#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "genrl/harness/agents.hpp"
#include "genrl/harness/config.hpp"
#include "genrl/harness/suite.hpp"

namespace genrl::harness {

struct EvalResult {
  std::map<std::string, double> metrics;  // without timings
  std::vector<double> episode_returns;
  std::uint64_t steps = 0;
  double test_seconds = 0.0;
};

/// Runs the environment's evaluation protocol: a fixed number of steps on
/// Blockmaze, of episodes on Pac-grid, or of generated instances on JSSP.
/// Environment seeds come from cfg.seed alone, so every agent and run faces
/// the same episodes; `seed` drives the policy's sampling.
EvalResult evaluate(const Agent& agent, const EnvSuite& suite, const EvalConfig& cfg, std::uint64_t seed);

}  // namespace genrl::harness
