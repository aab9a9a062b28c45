#pragma once

#include <cstddef>
#include <span>

#include "genrl/core_types.hpp"
#include "genrl/nn/optim.hpp"
#include "genrl/seq/model.hpp"

namespace genrl::seq {

struct MaentConfig {
  double beta = 0.0;  // entropy floor
  double dual_lr = 1e-3;
  double lambda_init = 0.0;
  std::size_t batch = 32;
  std::size_t context = 4;
  std::size_t buffer_capacity = 10000;
  std::size_t updates_between_rollouts = 300;
  nn::AdamWOptions optimizer{};

  void validate() const;
};

/// 0.5 * ln|A|.
double default_entropy_floor(std::size_t action_count);
/// -|A|, the literal table value; always slack for a discrete policy.
double literal_entropy_floor(std::size_t action_count);

struct MaentLossVars {
  nn::Var total;    // J - lambda (H - beta)
  nn::Var nll;      // J: mean -log pi(a_t | context)
  nn::Var entropy;  // H: mean policy entropy at the same positions
};

struct MaentStats {
  double nll = 0.0;
  double entropy = 0.0;
  double lambda = 0.0;  // after the dual step
};

/// Entropy-constrained likelihood fine-tuning with a non-negative dual
/// multiplier updated by projected ascent.
class MaentTrainer {
 public:
  explicit MaentTrainer(MaentConfig cfg);

  /// Loss at the current multiplier; every action token in every sequence is
  /// a target. Throws StateError on an empty batch.
  MaentLossVars loss(nn::Graph& g, SequenceModel& model, std::span<const TokenSequence> batch) const;

  /// One AdamW step on the Lagrangian, then
  /// lambda <- max(0, lambda + dual_lr * (beta - H)).
  MaentStats update(SequenceModel& model, std::span<const TokenSequence> batch);

  double lambda() const noexcept { return lambda_; }
  const MaentConfig& config() const noexcept { return cfg_; }
  std::size_t updates() const noexcept { return updates_; }

 private:
  MaentConfig cfg_;
  nn::AdamW optimizer_;
  double lambda_;
  std::size_t updates_ = 0;
};

/// Mean negative log-likelihood of the action tokens, without a tape.
double evaluate_nll(const SequenceModel& model, std::span<const TokenSequence> batch);

struct SampledAction {
  std::size_t action = 0;
  DiscretePolicyDist dist;
};

/// Distribution at the last timestep of context (whose action and reward
/// tokens are ignored). temperature 0 takes the argmax.
SampledAction sample_action(const SequenceModel& model, const TokenSequence& context, Rng& rng,
                            double temperature = 1.0);

}  // namespace genrl::seq
