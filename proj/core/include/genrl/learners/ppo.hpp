#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "genrl/learners/model.hpp"
#include "genrl/learners/segment.hpp"
#include "genrl/nn/optim.hpp"

namespace genrl::learners {

struct PpoConfig {
  double clip = 0.2;  // +infinity disables clipping
  int epochs = 15;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  bool normalize_advantages = true;

  void validate() const;
};

/// Surrogate epochs per task family: 15 for blockmaze and jssp, 3 for pacgrid.
int default_ppo_epochs(std::string_view env);

/// Generalized advantage estimates for one segment. values has n + 1 entries,
/// the last being the bootstrap value (0 for terminal segments).
std::vector<double> gae(std::span<const double> rewards, std::span<const double> values, double gamma,
                        double lambda);

template <class Input>
struct PpoPrepared {
  std::vector<Input> inputs;
  std::vector<std::size_t> actions;
  std::vector<ActionMask> masks;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
  std::vector<double> returns;
};

struct PpoLossVars {
  nn::Var total;
  nn::Var policy;   // -mean(min(ratio A, clip(ratio) A))
  nn::Var value;    // mean((V - R)^2)
  nn::Var entropy;  // mean policy entropy
  nn::Var ratio;    // B x 1 pi / mu
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;  // share of steps whose ratio left [1 - clip, 1 + clip] in the last epoch
};

/// Clipped-surrogate policy optimization over full batches of segments.
template <PolicyModel M>
class PpoLearner {
 public:
  using Input = typename M::Input;
  using Batch = std::span<const Segment<Input>>;

  PpoLearner(M model, PpoConfig cfg, std::unique_ptr<nn::Optimizer> optimizer)
      : model_(std::move(model)), cfg_(cfg), opt_(std::move(optimizer)) {
    cfg_.validate();
  }

  /// Advantages and returns from the current value head; held fixed for all
  /// epochs of one update.
  PpoPrepared<Input> prepare(Batch batch) const {
    if (batch.empty()) throw StateError("ppo: empty batch");
    PpoPrepared<Input> out;
    for (const auto& seg : batch) {
      seg.validate();
      std::vector<Input> xs(seg.inputs);
      if (!seg.terminal) xs.push_back(*seg.bootstrap);
      auto values = model_.infer(xs).values;
      if (seg.terminal) values.push_back(0.0);
      const auto adv = gae(seg.rewards, values, cfg_.gamma, cfg_.gae_lambda);
      for (std::size_t t = 0; t < seg.length(); ++t) {
        out.inputs.push_back(seg.inputs[t]);
        out.actions.push_back(static_cast<std::size_t>(seg.actions[t]));
        out.masks.push_back(seg.masks.empty() ? ActionMask{} : seg.masks[t]);
        out.old_log_probs.push_back(seg.behavior_log_probs[t]);
        out.advantages.push_back(adv[t]);
        out.returns.push_back(adv[t] + values[t]);
      }
    }
    if (cfg_.normalize_advantages && out.advantages.size() > 1) {
      double mean = 0.0, sq = 0.0;
      for (double a : out.advantages) mean += a;
      mean /= static_cast<double>(out.advantages.size());
      for (double a : out.advantages) sq += (a - mean) * (a - mean);
      const double sd = std::sqrt(sq / static_cast<double>(out.advantages.size()));
      for (double& a : out.advantages) a = (a - mean) / (sd + 1e-8);
    }
    return out;
  }

  PpoLossVars loss(nn::Graph& g, const PpoPrepared<Input>& prep) {
    for (std::size_t a : prep.actions) {
      if (a >= model_.action_count()) throw std::out_of_range("ppo: action out of range");
    }
    const auto heads = model_.forward(g, prep.inputs);
    const nn::Var logp_all = g.log_softmax_rows(apply_masks(g, heads.logits, prep.masks));
    const nn::Var logp = g.pick(logp_all, prep.actions);
    const nn::Var ratio = g.exp(g.sub(logp, g.constant(nn::Matrix::column(prep.old_log_probs))));
    const nn::Var adv = g.constant(nn::Matrix::column(prep.advantages));
    const nn::Var surr1 = g.mul(ratio, adv);
    const nn::Var surr2 = g.mul(g.clamp(ratio, 1.0 - cfg_.clip, 1.0 + cfg_.clip), adv);
    PpoLossVars out;
    out.ratio = ratio;
    out.policy = g.scale(g.mean(g.minimum(surr1, surr2)), -1.0);
    out.value = g.mean(g.square(g.sub(heads.value, g.constant(nn::Matrix::column(prep.returns)))));
    const nn::Var plogp = g.mul(g.exp(logp_all), logp_all);
    out.entropy = g.scale(g.mean(g.sum_rows(plogp)), -1.0);
    out.total = g.add(g.add(out.policy, g.scale(out.value, cfg_.value_coef)), g.scale(out.entropy, -cfg_.entropy_coef));
    return out;
  }

  /// cfg.epochs full-batch gradient steps on one prepared batch.
  PpoStats update(Batch batch) {
    const auto prep = prepare(batch);
    auto params = model_.parameters();
    PpoStats stats;
    for (int e = 0; e < cfg_.epochs; ++e) {
      nn::zero_grad(params);
      nn::Graph g;
      const auto l = loss(g, prep);
      g.backward(l.total);
      opt_->step(params);
      stats.policy_loss = g.scalar_value(l.policy);
      stats.value_loss = g.scalar_value(l.value);
      stats.entropy = g.scalar_value(l.entropy);
      if (e + 1 == cfg_.epochs) {
        std::size_t clipped = 0;
        for (double r : g.value(l.ratio).data) {
          if (r < 1.0 - cfg_.clip || r > 1.0 + cfg_.clip) ++clipped;
        }
        stats.clip_fraction = static_cast<double>(clipped) / static_cast<double>(prep.actions.size());
      }
    }
    ++updates_;
    return stats;
  }

  M& model() noexcept { return model_; }
  const M& model() const noexcept { return model_; }
  const PpoConfig& config() const noexcept { return cfg_; }
  std::size_t updates() const noexcept { return updates_; }

 private:
  M model_;
  PpoConfig cfg_;
  std::unique_ptr<nn::Optimizer> opt_;
  std::size_t updates_ = 0;
};

}  // namespace genrl::learners
