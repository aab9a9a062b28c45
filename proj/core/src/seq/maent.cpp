#include "genrl/seq/maent.hpp"

#include <algorithm>
#include <cmath>

#include "genrl/errors.hpp"

namespace genrl::seq {

void MaentConfig::validate() const {
  if (!(dual_lr >= 0.0)) throw ConfigError("maent: dual_lr must be >= 0");
  if (!(lambda_init >= 0.0)) throw ConfigError("maent: lambda_init must be >= 0");
  if (batch == 0 || context == 0 || buffer_capacity == 0 || updates_between_rollouts == 0) {
    throw ConfigError("maent: batch, context, buffer_capacity and updates_between_rollouts must be >= 1");
  }
  if (!std::isfinite(beta)) throw ConfigError("maent: beta must be finite");
}

double default_entropy_floor(std::size_t action_count) { return 0.5 * std::log(static_cast<double>(action_count)); }
double literal_entropy_floor(std::size_t action_count) { return -static_cast<double>(action_count); }

MaentTrainer::MaentTrainer(MaentConfig cfg) : cfg_(cfg), optimizer_(cfg.optimizer), lambda_(cfg.lambda_init) {
  cfg_.validate();
}

namespace {

std::vector<std::size_t> action_targets(std::span<const TokenSequence> batch) {
  std::vector<std::size_t> out;
  for (const auto& s : batch)
    for (const auto& t : s.steps) out.push_back(t.action);
  return out;
}

std::vector<ActionMask> step_masks(std::span<const TokenSequence> batch) {
  std::vector<ActionMask> out;
  for (const auto& s : batch)
    for (const auto& t : s.steps) out.push_back(t.mask);
  return out;
}

}  // namespace

MaentLossVars MaentTrainer::loss(nn::Graph& g, SequenceModel& model, std::span<const TokenSequence> batch) const {
  if (batch.empty()) throw StateError("maent: empty batch");
  const auto heads = model.forward_all(g, batch);
  const auto masks = step_masks(batch);
  const nn::Var logp_all = g.log_softmax_rows(learners::apply_masks(g, heads.logits, masks));
  const auto targets = action_targets(batch);
  MaentLossVars out;
  out.nll = g.scale(g.mean(g.pick(logp_all, targets)), -1.0);
  out.entropy = g.scale(g.mean(g.sum_rows(g.mul(g.exp(logp_all), logp_all))), -1.0);
  out.total = g.sub(out.nll, g.scale(g.add_scalar(out.entropy, -cfg_.beta), lambda_));
  return out;
}

MaentStats MaentTrainer::update(SequenceModel& model, std::span<const TokenSequence> batch) {
  auto params = model.parameters();
  nn::zero_grad(params);
  nn::Graph g;
  const auto l = loss(g, model, batch);
  g.backward(l.total);
  optimizer_.step(params);
  const double h = g.scalar_value(l.entropy);
  lambda_ = std::max(0.0, lambda_ + cfg_.dual_lr * (cfg_.beta - h));
  ++updates_;
  return {g.scalar_value(l.nll), h, lambda_};
}

double evaluate_nll(const SequenceModel& model, std::span<const TokenSequence> batch) {
  if (batch.empty()) throw StateError("maent: empty batch");
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& s : batch) {
    const auto out = model.infer_all(s);
    for (std::size_t t = 0; t < s.length(); ++t) {
      const auto dist = DiscretePolicyDist::from_logits(out.logits.row_span(t), s.steps[t].mask);
      total -= dist.log_prob(s.steps[t].action);
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

SampledAction sample_action(const SequenceModel& model, const TokenSequence& context, Rng& rng, double temperature) {
  const auto out = model.infer(std::span<const TokenSequence>(&context, 1));
  const auto& mask = context.steps.back().mask;
  auto dist = DiscretePolicyDist::from_logits(out.logits.row_span(0), mask, temperature);
  const std::size_t a = temperature <= 0.0 ? dist.argmax() : dist.sample(rng);
  return {a, std::move(dist)};
}

}  // namespace genrl::seq
