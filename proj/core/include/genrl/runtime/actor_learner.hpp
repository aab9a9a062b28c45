#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "genrl/core_types.hpp"
#include "genrl/learners/model.hpp"
#include "genrl/learners/segment.hpp"
#include "genrl/runtime/budget.hpp"
#include "genrl/runtime/encoders.hpp"
#include "genrl/runtime/policy_store.hpp"
#include "genrl/runtime/queue.hpp"
#include "genrl/runtime/segment_log.hpp"

namespace genrl::runtime {

struct ActorLearnerConfig {
  std::size_t actors = 4;
  std::size_t segment_length = 20;  // n
  std::size_t queue_capacity = 64;
  std::size_t batch = 32;
  /// Single actor interleaved with the learner on the calling thread.
  bool synchronous = false;
  std::uint64_t seed = 0;
  /// Per-actor JSONL transition logs are written here when non-empty.
  std::filesystem::path log_dir;

  void validate() const;
};

struct ActorLearnerStats {
  std::uint64_t produced = 0;   // segments accepted by the queue
  std::uint64_t consumed = 0;   // segments taken off the queue by the learner
  std::uint64_t discarded = 0;  // consumed after a time budget expired, never trained on
  std::uint64_t queued = 0;     // left in the queue at shutdown
  std::uint64_t updates = 0;
  std::uint64_t final_version = 0;
  double mean_lag = 0.0;
  std::uint64_t max_lag = 0;
  std::uint64_t env_steps = 0;
  std::uint64_t episodes = 0;
  std::size_t queue_high_water = 0;
  std::vector<double> episode_returns;  // completion order
  double train_seconds = 0.0;
};

template <class L, class Input>
concept SegmentLearner = requires(L& l, std::span<const learners::Segment<Input>> batch) {
  l.update(batch);
  l.model();
};

using EnvFactory = std::function<std::unique_ptr<Environment>(std::size_t actor)>;

/// One actor: owns an environment and an encoder, and turns the latest
/// snapshot into segments of at most n steps.
template <learners::PolicyModel M, InputEncoder E>
class ActorWorker {
 public:
  using Input = typename E::Input;

  ActorWorker(std::size_t id, std::unique_ptr<Environment> env, E encoder, std::uint64_t seed,
              std::filesystem::path log_path = {})
      : id_(id), env_(std::move(env)), encoder_(std::move(encoder)), rng_(seed, id + 1), seed_(seed) {
    if (!log_path.empty()) log_ = SegmentLog(log_path);
  }

  /// Rolls out up to n steps with the store's latest snapshot. Returns
  /// nullopt when the budget admits no further step.
  std::optional<learners::Segment<Input>> collect(const PolicyStore<M>& store, BudgetTracker& budget, std::size_t n,
                                                  std::vector<double>& finished_returns) {
    const auto snap = store.snapshot();
    if (!in_episode_) {
      if (!budget.try_begin_episode()) return std::nullopt;
      const Observation obs = env_->reset(mix64(seed_ ^ mix64((id_ << 32) + episode_)));
      mask_ = env_->action_mask();
      input_ = encoder_.reset(*env_, obs, mask_);
      in_episode_ = true;
      episode_return_ = 0.0;
      t_ = 0;
    }
    learners::Segment<Input> seg;
    seg.policy_version = snap->version;
    seg.actor = id_;
    const bool masked = !mask_.empty();
    while (seg.length() < n) {
      if (!budget.try_consume_step()) break;
      const auto dist = learners::policy_of(snap->model, *input_, mask_);
      const auto a = static_cast<int>(dist.sample(rng_));
      const double logp = dist.log_prob(static_cast<std::size_t>(a));
      const StepResult r = env_->step(a);
      seg.inputs.push_back(std::move(*input_));
      seg.actions.push_back(a);
      seg.rewards.push_back(r.reward);
      seg.behavior_log_probs.push_back(logp);
      if (masked) seg.masks.push_back(mask_);
      log_.write({id_, snap->version, episode_, t_, a, r.reward, logp, r.done});
      ++t_;
      episode_return_ += r.reward;
      mask_ = env_->action_mask();
      input_ = encoder_.advance(a, r.reward, r.observation, mask_);
      if (r.done) {
        seg.terminal = true;
        in_episode_ = false;
        ++episode_;
        budget.end_episode();
        finished_returns.push_back(episode_return_);
        break;
      }
    }
    if (seg.length() == 0) return std::nullopt;
    if (!seg.terminal) seg.bootstrap = *input_;
    return seg;
  }

  void flush_log() { log_.flush(); }

 private:
  std::size_t id_;
  std::unique_ptr<Environment> env_;
  E encoder_;
  Rng rng_;
  std::uint64_t seed_;
  SegmentLog log_;
  bool in_episode_ = false;
  std::uint64_t episode_ = 0;
  std::uint64_t t_ = 0;
  double episode_return_ = 0.0;
  ActionMask mask_;
  std::optional<Input> input_;
};

/// Actors generate segments from the latest snapshot, the learner consumes
/// them in arrival order in batches and publishes a new snapshot after every
/// update. Step and episode budgets stop the actors and every segment they
/// produced is trained on; a time budget stops the learner at the first
/// batch boundary past the deadline.
template <learners::PolicyModel M, InputEncoder E, class L>
  requires SegmentLearner<L, typename E::Input>
ActorLearnerStats run_actor_learner(L& learner, const EnvFactory& make_env, const E& encoder, BudgetTracker& budget,
                                    const ActorLearnerConfig& cfg) {
  using Input = typename E::Input;
  using Seg = learners::Segment<Input>;
  cfg.validate();
  PolicyStore<M> store(learner.model());
  ActorLearnerStats stats;
  std::vector<Seg> batch;
  double lag_sum = 0.0;

  auto log_path = [&](std::size_t i) -> std::filesystem::path {
    if (cfg.log_dir.empty()) return {};
    std::filesystem::create_directories(cfg.log_dir);
    return cfg.log_dir / ("actor_" + std::to_string(i) + ".jsonl");
  };
  auto take = [&](Seg seg) {
    ++stats.consumed;
    const std::uint64_t lag = store.version() - seg.policy_version;
    lag_sum += static_cast<double>(lag);
    stats.max_lag = std::max(stats.max_lag, lag);
    batch.push_back(std::move(seg));
  };
  auto train = [&] {
    learner.update(std::span<const Seg>(batch));
    store.publish(learner.model());
    ++stats.updates;
    batch.clear();
  };
  const bool timed = budget.kind() == BudgetKind::kSeconds;

  budget.start();
  if (cfg.synchronous) {
    ActorWorker<M, E> actor(0, make_env(0), encoder, cfg.seed, log_path(0));
    while (auto seg = actor.collect(store, budget, cfg.segment_length, stats.episode_returns)) {
      ++stats.produced;
      take(std::move(*seg));
      if (batch.size() == cfg.batch) {
        train();
        if (timed && budget.exhausted()) break;
      }
    }
    if (!batch.empty()) {
      if (timed && budget.exhausted()) {
        stats.discarded += batch.size();
      } else {
        train();
      }
    }
    actor.flush_log();
  } else {
    BoundedQueue<Seg> queue(cfg.queue_capacity);
    std::atomic<bool> stop{false};
    std::atomic<std::size_t> running{cfg.actors};
    std::mutex returns_mu;
    std::vector<std::thread> threads;
    std::exception_ptr actor_error;
    for (std::size_t i = 0; i < cfg.actors; ++i) {
      threads.emplace_back([&, i] {
        try {
          ActorWorker<M, E> actor(i, make_env(i), encoder, cfg.seed, log_path(i));
          std::vector<double> finished;
          while (!stop) {
            auto seg = actor.collect(store, budget, cfg.segment_length, finished);
            {
              std::lock_guard lock(returns_mu);
              stats.episode_returns.insert(stats.episode_returns.end(), finished.begin(), finished.end());
            }
            finished.clear();
            if (!seg) break;
            bool pushed = false;
            while (!stop && !pushed) pushed = queue.push_for(*seg, std::chrono::milliseconds(5));
            if (pushed) {
              std::lock_guard lock(returns_mu);
              ++stats.produced;
            }
          }
          actor.flush_log();
        } catch (...) {
          std::lock_guard lock(returns_mu);
          if (!actor_error) actor_error = std::current_exception();
          stop = true;
        }
        --running;
      });
    }
    auto shutdown = [&] {
      stop = true;
      for (auto& t : threads) t.join();
    };
    try {
      for (;;) {
        if (stop) break;
        auto seg = queue.pop_for(std::chrono::milliseconds(5));
        if (seg) {
          take(std::move(*seg));
          if (batch.size() == cfg.batch) {
            train();
            if (timed && budget.exhausted()) break;
          }
        } else if (running == 0 && queue.size() == 0) {
          break;
        }
      }
      if (!batch.empty()) {
        if (timed && budget.exhausted()) {
          stats.discarded += batch.size();
        } else if (!stop) {
          train();
        } else {
          stats.discarded += batch.size();
        }
      }
    } catch (...) {
      shutdown();
      throw;
    }
    shutdown();
    if (actor_error) std::rethrow_exception(actor_error);
    stats.queued = queue.size();
    stats.queue_high_water = queue.high_water_mark();
  }
  stats.train_seconds = budget.elapsed_seconds();
  stats.final_version = store.version();
  stats.mean_lag = stats.consumed ? lag_sum / static_cast<double>(stats.consumed) : 0.0;
  stats.env_steps = budget.steps();
  stats.episodes = budget.episodes_completed();
  return stats;
}

}  // namespace genrl::runtime
