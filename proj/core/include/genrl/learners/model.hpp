#pragma once

#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "genrl/core_types.hpp"
#include "genrl/nn/graph.hpp"
#include "genrl/nn/mlp.hpp"

namespace genrl::learners {

/// Tape outputs of a policy/value model for a batch of B inputs.
struct ModelHeads {
  nn::Var logits;  // B x A (Q-values for DQN)
  nn::Var value;   // B x 1
};

/// Tape-free outputs for the same batch.
struct HeadValues {
  nn::Matrix logits;
  std::vector<double> values;
};

template <class M>
concept PolicyModel = std::copy_constructible<M> &&
    requires(M& m, const M& cm, nn::Graph& g, std::span<const typename M::Input> xs) {
      { m.forward(g, xs) } -> std::same_as<ModelHeads>;
      { cm.infer(xs) } -> std::same_as<HeadValues>;
      { m.parameters() } -> std::same_as<std::vector<nn::Parameter*>>;
      { cm.action_count() } -> std::convertible_to<std::size_t>;
    };

/// Large negative logit offset applied to masked-out actions.
inline constexpr double kMaskedLogit = -1e9;

/// logits + offsets, with kMaskedLogit on every disallowed action. Empty masks
/// leave a row untouched.
nn::Var apply_masks(nn::Graph& g, nn::Var logits, std::span<const ActionMask> masks);
void apply_masks(nn::Matrix& logits, std::span<const ActionMask> masks);

/// Policy and value MLPs over flattened observations. Without a value
/// network the value head reads zero.
class MlpModel {
 public:
  using Input = Observation;

  MlpModel() = default;
  /// hidden lists the hidden widths shared by both networks.
  MlpModel(std::size_t input_width, std::size_t action_count, std::vector<std::size_t> hidden,
           nn::Activation activation, Rng& rng, const std::string& name = "model", bool with_value = true);

  std::size_t input_width() const { return policy_.input_width(); }
  std::size_t action_count() const { return policy_.output_width(); }

  ModelHeads forward(nn::Graph& g, std::span<const Observation> xs);
  HeadValues infer(std::span<const Observation> xs) const;

  std::vector<nn::Parameter*> parameters();
  std::vector<const nn::Parameter*> parameters() const;
  std::size_t parameter_count() const {
    return policy_.parameter_count() + (with_value_ ? value_.parameter_count() : 0);
  }
  bool has_value() const noexcept { return with_value_; }

  nn::Mlp& policy_net() noexcept { return policy_; }
  nn::Mlp& value_net() noexcept { return value_; }

 private:
  nn::Matrix stack(std::span<const Observation> xs) const;

  nn::Mlp policy_;
  nn::Mlp value_;
  bool with_value_ = true;
};

/// Distribution of a single input under the model, with masking applied.
template <PolicyModel M>
DiscretePolicyDist policy_of(const M& model, const typename M::Input& x, const ActionMask& mask = {},
                             double temperature = 1.0) {
  const auto out = model.infer(std::span<const typename M::Input>(&x, 1));
  return DiscretePolicyDist::from_logits(out.logits.row_span(0), mask, temperature);
}

}  // namespace genrl::learners
