#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "genrl/core_types.hpp"
#include "genrl/harness/config.hpp"
#include "genrl/harness/suite.hpp"
#include "genrl/nn/checkpoint.hpp"
#include "genrl/nn/graph.hpp"
#include "genrl/runtime/budget.hpp"

namespace genrl::harness {

struct TrainStats {
  std::uint64_t updates = 0;
  std::uint64_t env_steps = 0;
  std::uint64_t episodes = 0;
  double train_seconds = 0.0;
  std::vector<double> episode_returns;
};

/// Acts in an environment episode by episode with a frozen policy.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void reset(const Environment& env, const Observation& obs, const ActionMask& mask) = 0;
  virtual int act(const ActionMask& mask, Rng& rng) = 0;
  virtual void advance(int action, double reward, const Observation& obs, const ActionMask& mask) = 0;
};

/// One agent configuration. Agents keep references to the experiment config
/// and environment suite, which must outlive them.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual const std::string& tag() const = 0;
  virtual std::unique_ptr<Agent> clone() const = 0;

  /// Trains on the environment family standing in for the pre-training suite.
  virtual TrainStats pretrain(std::uint64_t seed) = 0;
  /// Trains on the target environment until the budget is spent.
  virtual TrainStats finetune(runtime::BudgetTracker& budget, std::uint64_t seed) = 0;
  virtual std::unique_ptr<Controller> controller() const = 0;

  virtual std::vector<nn::Parameter*> parameters() = 0;
  /// Non-parameter state that a checkpoint must carry.
  virtual nn::CheckpointMeta state() const { return {}; }
  virtual void restore(const nn::CheckpointMeta&) {}

  /// Directory for per-actor transition logs; empty disables logging.
  void set_log_dir(std::filesystem::path dir) { log_dir_ = std::move(dir); }

 protected:
  std::filesystem::path log_dir_;
};

/// Throws ConfigError for unknown tags.
std::unique_ptr<Agent> make_agent(const std::string& tag, const ExperimentConfig& cfg, const EnvSuite& suite,
                                  std::uint64_t seed);

void save_agent(Agent& agent, const std::filesystem::path& path, nn::CheckpointMeta extra = {});
/// Returns the stored metadata.
nn::CheckpointMeta load_agent(Agent& agent, const std::filesystem::path& path);

}  // namespace genrl::harness
