#include "genrl/runtime/mgdt.hpp"

#include <algorithm>
#include <limits>

#include "genrl/errors.hpp"

namespace genrl::runtime {

TokenEpisode make_token_episode(const std::vector<Observation>& observations, const std::vector<int>& actions,
                                const std::vector<double>& rewards, const std::vector<ActionMask>& masks,
                                std::size_t patch_count, const seq::ReturnQuantizer& q, bool complete) {
  const std::size_t n = actions.size();
  if (observations.size() != n || rewards.size() != n || (!masks.empty() && masks.size() != n)) {
    throw ShapeError("token episode: ragged inputs");
  }
  TokenEpisode ep;
  ep.patch_count = patch_count;
  ep.complete = complete;
  double to_go = 0.0;
  for (double r : rewards) to_go += r;
  ep.episode_return = to_go;
  for (std::size_t t = 0; t < n; ++t) {
    ep.steps.push_back(seq::encode_step(observations[t], patch_count, q, to_go, static_cast<std::size_t>(actions[t]),
                                        rewards[t], masks.empty() ? ActionMask{} : masks[t]));
    to_go -= rewards[t];
  }
  if (n > 0) ep.patch_size = observations.front().size() / patch_count;
  return ep;
}

seq::TokenSequence sample_window(const TokenEpisode& ep, std::size_t k, Rng& rng) {
  if (ep.steps.empty()) throw StateError("sample_window: empty episode");
  const std::size_t len = std::min(k, ep.steps.size());
  const std::size_t start = rng.below(ep.steps.size() - len + 1);
  seq::TokenSequence s;
  s.patch_count = ep.patch_count;
  s.patch_size = ep.patch_size;
  s.steps.assign(ep.steps.begin() + static_cast<std::ptrdiff_t>(start),
                 ep.steps.begin() + static_cast<std::ptrdiff_t>(start + len));
  return s;
}

TokenEpisode rollout_tokens(const seq::SequenceModel& model, Environment& env, TokenEncoder& encoder,
                            std::uint64_t reset_seed, double temperature, Rng& rng, BudgetTracker* budget) {
  std::vector<Observation> obs;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<ActionMask> masks;
  Observation o = env.reset(reset_seed);
  ActionMask mask = env.action_mask();
  auto ctx = encoder.reset(env, o, mask);
  bool done = false;
  while (!done) {
    if (budget && !budget->try_consume_step()) break;
    const auto pick = seq::sample_action(model, ctx, rng, temperature);
    const int a = static_cast<int>(pick.action);
    const StepResult r = env.step(a);
    obs.push_back(std::move(o));
    actions.push_back(a);
    rewards.push_back(r.reward);
    masks.push_back(mask);
    o = r.observation;
    mask = env.action_mask();
    ctx = encoder.advance(a, r.reward, o, mask);
    done = r.done;
  }
  return make_token_episode(obs, actions, rewards, masks, model.spec().patch_count, encoder.quantizer(), done);
}

MgdtFinetuneStats finetune_mgdt(seq::SequenceModel& model, Environment& env, TokenEncoder& encoder,
                                BudgetTracker& budget, const MgdtFinetuneConfig& cfg,
                                ReplayBuffer<TokenEpisode>* buffer) {
  if (env.action_count() != model.action_count()) {
    throw ContractError("finetune: environment and model disagree on the action count");
  }
  ReplayBuffer<TokenEpisode> local(cfg.maent.buffer_capacity);
  ReplayBuffer<TokenEpisode>& replay = buffer ? *buffer : local;
  seq::MaentTrainer trainer(cfg.maent);
  Rng rng(cfg.seed, 0x6d676474);
  MgdtFinetuneStats stats;
  double best = -std::numeric_limits<double>::infinity();
  const bool timed = budget.kind() == BudgetKind::kSeconds;
  budget.start();
  std::vector<seq::TokenSequence> batch;
  while (!budget.exhausted() && (cfg.max_updates == 0 || stats.updates < cfg.max_updates)) {
    bool rolled = false;
    for (std::size_t e = 0; e < cfg.rollout_episodes; ++e) {
      if (!budget.try_begin_episode()) break;
      auto ep = rollout_tokens(model, env, encoder, mix64(cfg.seed ^ mix64(stats.episodes + 1)), cfg.temperature, rng,
                               &budget);
      stats.env_steps += ep.steps.size();
      if (ep.steps.empty()) break;
      rolled = true;
      if (ep.complete) {
        budget.end_episode();
        ++stats.episodes;
        stats.episode_returns.push_back(ep.episode_return);
        best = std::max(best, ep.episode_return);
      }
      replay.push(std::move(ep));
      if (budget.exhausted()) break;
    }
    if (best > -std::numeric_limits<double>::infinity()) encoder.set_target_return(best);
    if (!rolled || replay.empty()) break;
    for (std::size_t u = 0; u < cfg.maent.updates_between_rollouts; ++u) {
      if (timed && budget.exhausted()) break;
      if (cfg.max_updates != 0 && stats.updates >= cfg.max_updates) break;
      batch.clear();
      for (std::size_t b = 0; b < cfg.maent.batch; ++b) batch.push_back(sample_window(replay.sample(rng), cfg.maent.context, rng));
      const auto s = trainer.update(model, batch);
      stats.nll.push_back(s.nll);
      stats.entropy.push_back(s.entropy);
      stats.lambda.push_back(s.lambda);
      ++stats.updates;
    }
  }
  stats.target_return = encoder.target_return();
  stats.buffer_size = replay.size();
  stats.train_seconds = budget.elapsed_seconds();
  return stats;
}

}  // namespace genrl::runtime
