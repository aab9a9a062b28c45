#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "genrl/core_types.hpp"
#include "genrl/learners/dqn.hpp"
#include "genrl/runtime/budget.hpp"
#include "genrl/runtime/encoders.hpp"
#include "genrl/runtime/replay.hpp"

namespace genrl::runtime {

struct DqnLoopConfig {
  std::size_t replay_capacity = 10000;
  std::size_t warmup_steps = 256;  // env steps before the first update
  std::size_t train_every = 1;     // env steps per update
  std::uint64_t seed = 0;
};

struct DqnLoopStats {
  std::uint64_t env_steps = 0;
  std::uint64_t episodes = 0;
  std::uint64_t updates = 0;
  std::vector<double> episode_returns;
  std::vector<double> losses;
  double train_seconds = 0.0;
};

/// Epsilon-greedy interaction with uniform replay; epsilon follows the
/// learner's schedule over environment steps.
template <learners::PolicyModel M, InputEncoder E>
DqnLoopStats run_dqn(learners::DqnLearner<M>& learner, Environment& env, E encoder, BudgetTracker& budget,
                     const DqnLoopConfig& cfg) {
  using Input = typename E::Input;
  if (env.action_count() != learner.model().action_count()) {
    throw ContractError("dqn loop: environment and model disagree on the action count");
  }
  ReplayBuffer<learners::QTransition<Input>> replay(cfg.replay_capacity);
  Rng rng(cfg.seed, 0x6471);
  DqnLoopStats stats;
  const std::size_t batch_size = learner.config().batch;
  std::vector<learners::QTransition<Input>> batch;
  budget.start();
  while (budget.try_begin_episode()) {
    Observation obs = env.reset(mix64(cfg.seed ^ mix64(stats.episodes + 1)));
    ActionMask mask = env.action_mask();
    Input x = encoder.reset(env, obs, mask);
    double ret = 0.0;
    bool finished = false;
    while (budget.try_consume_step()) {
      const double eps = learners::epsilon_at(stats.env_steps, learner.config());
      const int a = learner.act(x, mask, eps, rng);
      const StepResult r = env.step(a);
      ++stats.env_steps;
      ret += r.reward;
      ActionMask next_mask = env.action_mask();
      Input nx = encoder.advance(a, r.reward, r.observation, next_mask);
      replay.push({x, a, r.reward, nx, r.done, next_mask});
      x = std::move(nx);
      mask = std::move(next_mask);
      if (stats.env_steps >= cfg.warmup_steps && stats.env_steps % cfg.train_every == 0 &&
          replay.size() >= batch_size) {
        batch.clear();
        for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(replay.sample(rng));
        stats.losses.push_back(learner.update(batch));
        ++stats.updates;
      }
      if (r.done) {
        finished = true;
        break;
      }
      if (budget.kind() == BudgetKind::kSeconds && budget.exhausted()) break;
    }
    if (!finished) break;
    budget.end_episode();
    ++stats.episodes;
    stats.episode_returns.push_back(ret);
  }
  stats.train_seconds = budget.elapsed_seconds();
  return stats;
}

}  // namespace genrl::runtime
