#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "genrl/learners/model.hpp"
#include "genrl/learners/segment.hpp"
#include "genrl/nn/optim.hpp"
#include "genrl/vtrace.hpp"

namespace genrl::learners {

template <class Input>
struct VTracePrepared {
  std::vector<Input> inputs;
  std::vector<std::size_t> actions;
  std::vector<ActionMask> masks;
  std::vector<double> targets;        // v_s
  std::vector<double> pg_advantages;  // stop-gradient
};

struct VTraceLossVars {
  nn::Var total;
  nn::Var pg;       // -sum A_s log pi(a_s | x_s)
  nn::Var value;    // 0.5 sum (v_s - V(x_s))^2
  nn::Var entropy;  // sum_s sum_a pi log pi  (negative entropy)
};

struct VTraceLosses {
  double total = 0.0;
  double pg = 0.0;
  double value = 0.0;
  double entropy = 0.0;
};

/// Off-policy actor-critic: V-trace targets for the value head, truncated
/// importance-weighted policy gradient, entropy regularization, RMSProp.
template <PolicyModel M>
class VTraceLearner {
 public:
  using Input = typename M::Input;
  using Batch = std::span<const Segment<Input>>;

  VTraceLearner(M model, vtrace::VTraceConfig cfg, std::unique_ptr<nn::Optimizer> optimizer)
      : model_(std::move(model)), cfg_(cfg), opt_(std::move(optimizer)) {
    cfg_.validate();
  }

  VTracePrepared<Input> prepare(Batch batch) const {
    if (batch.empty()) throw StateError("vtrace learner: empty batch");
    VTracePrepared<Input> out;
    for (const auto& seg : batch) {
      seg.validate();
      std::vector<Input> xs(seg.inputs);
      if (!seg.terminal) xs.push_back(*seg.bootstrap);
      auto heads = model_.infer(xs);
      if (seg.terminal) heads.values.push_back(0.0);
      std::vector<double> ratios(seg.length());
      for (std::size_t t = 0; t < seg.length(); ++t) {
        const auto& mask = seg.masks.empty() ? ActionMask{} : seg.masks[t];
        const auto pi = DiscretePolicyDist::from_logits(heads.logits.row_span(t), mask);
        const auto a = static_cast<std::size_t>(seg.actions[t]);
        if (a >= pi.action_count()) throw std::out_of_range("vtrace learner: action out of range");
        ratios[t] = std::exp(pi.log_prob(a) - seg.behavior_log_probs[t]);
      }
      const auto vt = vtrace::compute_vtrace(heads.values, seg.rewards, ratios, cfg_);
      for (std::size_t t = 0; t < seg.length(); ++t) {
        out.inputs.push_back(seg.inputs[t]);
        out.actions.push_back(static_cast<std::size_t>(seg.actions[t]));
        out.masks.push_back(seg.masks.empty() ? ActionMask{} : seg.masks[t]);
        out.targets.push_back(vt.targets[t]);
        out.pg_advantages.push_back(vt.pg_advantages[t]);
      }
    }
    return out;
  }

  VTraceLossVars loss(nn::Graph& g, const VTracePrepared<Input>& prep) {
    const auto heads = model_.forward(g, prep.inputs);
    const nn::Var logp_all = g.log_softmax_rows(apply_masks(g, heads.logits, prep.masks));
    const nn::Var logp = g.pick(logp_all, prep.actions);
    VTraceLossVars out;
    out.pg = g.scale(g.sum(g.mul(logp, g.constant(nn::Matrix::column(prep.pg_advantages)))), -1.0);
    out.value = g.scale(g.sum(g.square(g.sub(g.constant(nn::Matrix::column(prep.targets)), heads.value))), 0.5);
    out.entropy = g.sum(g.mul(g.exp(logp_all), logp_all));
    out.total = g.add(g.add(out.pg, g.scale(out.value, cfg_.baseline_cost)), g.scale(out.entropy, cfg_.entropy_cost));
    return out;
  }

  /// One optimizer step over the whole batch; returns the pre-update losses.
  VTraceLosses update(Batch batch) {
    const auto prep = prepare(batch);
    auto params = model_.parameters();
    nn::zero_grad(params);
    nn::Graph g;
    const auto l = loss(g, prep);
    g.backward(l.total);
    opt_->step(params);
    ++updates_;
    return {g.scalar_value(l.total), g.scalar_value(l.pg), g.scalar_value(l.value), g.scalar_value(l.entropy)};
  }

  M& model() noexcept { return model_; }
  const M& model() const noexcept { return model_; }
  const vtrace::VTraceConfig& config() const noexcept { return cfg_; }
  std::size_t updates() const noexcept { return updates_; }

 private:
  M model_;
  vtrace::VTraceConfig cfg_;
  std::unique_ptr<nn::Optimizer> opt_;
  std::size_t updates_ = 0;
};

}  // namespace genrl::learners
