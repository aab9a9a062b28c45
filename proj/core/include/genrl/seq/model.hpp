#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "genrl/learners/model.hpp"
#include "genrl/nn/graph.hpp"
#include "genrl/rng.hpp"
#include "genrl/seq/tokenizer.hpp"

namespace genrl::seq {

struct SequenceModelSpec {
  std::size_t patch_count = 1;  // M
  std::size_t patch_size = 1;   // P
  std::size_t action_count = 2;
  std::size_t return_bins = 64;
  std::size_t context = 4;  // K timesteps
  std::size_t embed = 64;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t mlp_ratio = 4;

  /// Throws ConfigError on zero sizes or embed not divisible by heads.
  void validate() const;
};

/// Causal transformer over <patch_1..patch_M, R, a, r> timestep tokens.
///
/// Pre-norm blocks with multi-head attention and a tanh MLP, learned positional
/// embeddings, and action/value heads read at each timestep's return token.
/// The action head starts at zero, so a fresh model is uniform.
class SequenceModel {
 public:
  using Input = TokenSequence;

  SequenceModel() = default;
  SequenceModel(SequenceModelSpec spec, Rng& rng);

  const SequenceModelSpec& spec() const noexcept { return spec_; }
  std::size_t action_count() const noexcept { return spec_.action_count; }

  /// Heads at every timestep: logits T x A, value T x 1. Throws ContractError
  /// for sequences longer than the context or with out-of-vocabulary tokens.
  learners::ModelHeads forward_all(nn::Graph& g, const TokenSequence& seq);
  /// Heads at the last timestep of each sequence (B rows).
  learners::ModelHeads forward(nn::Graph& g, std::span<const TokenSequence> batch);
  /// forward_all for a batch, rows concatenated in order.
  learners::ModelHeads forward_all(nn::Graph& g, std::span<const TokenSequence> batch);

  learners::HeadValues infer(std::span<const TokenSequence> batch) const;
  learners::HeadValues infer_all(const TokenSequence& seq) const;

  std::vector<nn::Parameter*> parameters();
  std::vector<const nn::Parameter*> parameters() const;
  std::size_t parameter_count() const;

 private:
  std::vector<nn::Var> bind(nn::Graph& g);
  std::vector<nn::Var> bind_constant(nn::Graph& g) const;
  learners::ModelHeads run(nn::Graph& g, const std::vector<nn::Var>& p, const TokenSequence& seq,
                           bool last_only) const;
  void add(const std::string& name, nn::Matrix value);

  SequenceModelSpec spec_;
  std::vector<nn::Parameter> params_;
};

}  // namespace genrl::seq
