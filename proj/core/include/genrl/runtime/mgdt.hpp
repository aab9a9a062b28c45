#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "genrl/core_types.hpp"
#include "genrl/runtime/budget.hpp"
#include "genrl/runtime/encoders.hpp"
#include "genrl/runtime/replay.hpp"
#include "genrl/seq/maent.hpp"

namespace genrl::runtime {

/// Stored episode with hindsight return-to-go tokens.
struct TokenEpisode {
  std::vector<seq::TimestepTokens> steps;
  std::size_t patch_count = 0;
  std::size_t patch_size = 0;
  double episode_return = 0.0;
  bool complete = false;
};

/// Relabels every step's return token with the realized return-to-go.
TokenEpisode make_token_episode(const std::vector<Observation>& observations, const std::vector<int>& actions,
                                const std::vector<double>& rewards, const std::vector<ActionMask>& masks,
                                std::size_t patch_count, const seq::ReturnQuantizer& q, bool complete);

/// Uniform K-step window of an episode (the whole episode when shorter).
seq::TokenSequence sample_window(const TokenEpisode& ep, std::size_t k, Rng& rng);

struct MgdtFinetuneConfig {
  seq::MaentConfig maent;
  std::size_t rollout_episodes = 1;  // episodes per rollout phase
  std::size_t max_updates = 0;       // 0 = until the budget is spent
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

struct MgdtFinetuneStats {
  std::uint64_t updates = 0;
  std::uint64_t env_steps = 0;
  std::uint64_t episodes = 0;
  std::vector<double> nll;
  std::vector<double> entropy;
  std::vector<double> lambda;
  std::vector<double> episode_returns;
  double target_return = 0.0;
  std::size_t buffer_size = 0;
  double train_seconds = 0.0;
};

/// Rollout / replay / MAENT-update loop. Each phase rolls out
/// rollout_episodes episodes with the current model into the replay buffer,
/// raises the target return to the best return seen, and then applies
/// updates_between_rollouts updates on windows sampled from the buffer.
/// The encoder's target return is updated in place.
MgdtFinetuneStats finetune_mgdt(seq::SequenceModel& model, Environment& env, TokenEncoder& encoder,
                                BudgetTracker& budget, const MgdtFinetuneConfig& cfg,
                                ReplayBuffer<TokenEpisode>* buffer = nullptr);

/// Plays one episode with the model; returns its transitions as a token
/// episode. Stops early (incomplete) when the budget denies a step.
TokenEpisode rollout_tokens(const seq::SequenceModel& model, Environment& env, TokenEncoder& encoder,
                            std::uint64_t reset_seed, double temperature, Rng& rng, BudgetTracker* budget);

}  // namespace genrl::runtime
