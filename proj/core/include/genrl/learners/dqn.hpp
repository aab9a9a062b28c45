#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "genrl/learners/model.hpp"
#include "genrl/learners/segment.hpp"
#include "genrl/nn/optim.hpp"

namespace genrl::learners {

struct DqnConfig {
  double epsilon_start = 0.99;
  double epsilon_end = 0.05;
  std::size_t decay_horizon = 10000;  // env steps
  double gamma = 0.99;
  std::size_t target_sync_interval = 500;  // learner updates
  std::size_t batch = 32;
  double huber_delta = 1.0;

  void validate() const;
};

/// Linear from epsilon_start at step 0 to epsilon_end at decay_horizon, then flat.
double epsilon_at(std::size_t step, const DqnConfig& cfg);

struct DqnPrepared {
  std::vector<double> targets;  // r + gamma * max_a' Q_target(x', a'), no bootstrap at terminals
};

/// Q-learning with a periodically synced target network and Huber TD loss.
/// The model's logits head is read as Q-values; its value head is unused.
template <PolicyModel M>
class DqnLearner {
 public:
  using Input = typename M::Input;
  using Batch = std::span<const QTransition<Input>>;

  DqnLearner(M model, DqnConfig cfg, std::unique_ptr<nn::Optimizer> optimizer)
      : online_(std::move(model)), target_(online_), cfg_(cfg), opt_(std::move(optimizer)) {
    cfg_.validate();
  }

  DqnPrepared prepare(Batch batch) const {
    if (batch.empty()) throw StateError("dqn: empty batch");
    std::vector<Input> next;
    next.reserve(batch.size());
    for (const auto& t : batch) next.push_back(t.next_input);
    auto q = target_.infer(next).logits;
    std::vector<ActionMask> masks;
    for (const auto& t : batch) masks.push_back(t.next_mask);
    apply_masks(q, masks);
    DqnPrepared out;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      double best = 0.0;
      if (!batch[i].terminal) {
        const auto row = q.row_span(i);
        best = *std::max_element(row.begin(), row.end());
      }
      out.targets.push_back(batch[i].reward + cfg_.gamma * best);
    }
    return out;
  }

  /// Mean Huber TD loss of the online network against fixed targets.
  nn::Var loss(nn::Graph& g, Batch batch, const DqnPrepared& prep) {
    if (prep.targets.size() != batch.size()) throw ShapeError("dqn: targets do not match batch");
    std::vector<Input> xs;
    std::vector<std::size_t> actions;
    for (const auto& t : batch) {
      xs.push_back(t.input);
      if (t.action < 0 || static_cast<std::size_t>(t.action) >= online_.action_count()) {
        throw std::out_of_range("dqn: action out of range");
      }
      actions.push_back(static_cast<std::size_t>(t.action));
    }
    const auto heads = online_.forward(g, xs);
    const nn::Var q_sa = g.pick(heads.logits, actions);
    const nn::Var td = g.sub(q_sa, g.constant(nn::Matrix::column(prep.targets)));
    return g.mean(g.huber(td, cfg_.huber_delta));
  }

  /// One optimizer step; syncs the target network every target_sync_interval
  /// updates. Returns the pre-update loss.
  double update(Batch batch) {
    const auto prep = prepare(batch);
    auto params = online_.parameters();
    nn::zero_grad(params);
    nn::Graph g;
    const nn::Var l = loss(g, batch, prep);
    g.backward(l);
    opt_->step(params);
    if (++updates_ % cfg_.target_sync_interval == 0) sync_target();
    return g.scalar_value(l);
  }

  /// Epsilon-greedy over allowed actions; ties go to the lowest index.
  int act(const Input& x, const ActionMask& mask, double epsilon, Rng& rng) const {
    const std::size_t n = online_.action_count();
    if (rng.uniform() < epsilon) {
      std::vector<std::size_t> allowed;
      for (std::size_t a = 0; a < n; ++a) {
        if (action_allowed(mask, a)) allowed.push_back(a);
      }
      if (allowed.empty()) throw MaskedActionError("dqn: no allowed action");
      return static_cast<int>(allowed[rng.below(allowed.size())]);
    }
    return greedy(x, mask);
  }

  int greedy(const Input& x, const ActionMask& mask) const {
    auto q = online_.infer(std::span<const Input>(&x, 1)).logits;
    std::vector<ActionMask> masks{mask};
    apply_masks(q, masks);
    const auto row = q.row_span(0);
    return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }

  void sync_target() { target_ = online_; }

  M& model() noexcept { return online_; }
  const M& model() const noexcept { return online_; }
  const M& target() const noexcept { return target_; }
  const DqnConfig& config() const noexcept { return cfg_; }
  std::size_t updates() const noexcept { return updates_; }

 private:
  M online_;
  M target_;
  DqnConfig cfg_;
  std::unique_ptr<nn::Optimizer> opt_;
  std::size_t updates_ = 0;
};

}  // namespace genrl::learners
