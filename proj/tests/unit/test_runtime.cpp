#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <thread>
#include <vector>

#include <json.hpp>

#include "genrl/env/jssp.hpp"
#include "genrl/errors.hpp"
#include "genrl/learners/vtrace_learner.hpp"
#include "genrl/runtime/actor_learner.hpp"
#include "genrl/runtime/budget.hpp"
#include "genrl/runtime/encoders.hpp"
#include "genrl/runtime/mgdt.hpp"
#include "genrl/runtime/policy_store.hpp"
#include "genrl/runtime/queue.hpp"
#include "genrl/runtime/replay.hpp"

using namespace genrl;
using namespace genrl::runtime;
using namespace std::chrono_literals;

namespace {

// Reward t at step t; the episode ends after `length` steps. Observation is a
// 2x2 grid filled with t.
class CounterEnv final : public Environment {
 public:
  CounterEnv(int length, std::size_t actions) : length_(length), actions_(actions) {}
  std::size_t action_count() const override { return actions_; }
  ObservationShape observation_shape() const override { return {2, 2}; }
  Observation reset(std::uint64_t) override {
    t_ = 0;
    return observe();
  }
  StepResult step(int) override {
    if (done()) throw StateError("counter: done");
    StepResult r;
    r.reward = static_cast<double>(t_++);
    r.done = done();
    r.observation = observe();
    return r;
  }
  Observation observe() const override { return Observation(2, 2, std::vector<double>(4, t_)); }
  bool done() const override { return t_ >= length_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<CounterEnv>(*this); }

 private:
  int length_;
  std::size_t actions_;
  int t_ = 0;
};

using Model = learners::MlpModel;
using Learner = learners::VTraceLearner<Model>;

Learner jssp_learner(Rng& rng) {
  return Learner(Model(18, 3, {16}, nn::Activation::kRelu, rng), {}, std::make_unique<nn::RmsProp>());
}

EnvFactory jssp_factory() {
  return [](std::size_t) { return std::make_unique<env::JsspEnv>(env::JsspEnvOptions{3, 3, 1, 9}); };
}

seq::SequenceModelSpec counter_spec() {
  seq::SequenceModelSpec s;
  s.patch_count = 1;
  s.patch_size = 4;
  s.action_count = 2;
  s.return_bins = 8;
  s.context = 2;
  s.embed = 8;
  s.heads = 2;
  s.layers = 1;
  s.mlp_ratio = 1;
  return s;
}

}  // namespace

TEST(BoundedQueue, CapacityAndClose) {
  EXPECT_THROW(BoundedQueue<int>(0), ConfigError);
  BoundedQueue<int> q(2);
  EXPECT_TRUE(q.push(1));
  EXPECT_TRUE(q.push(2));
  int item = 3;
  EXPECT_FALSE(q.push_for(item, 10ms));
  EXPECT_EQ(q.size(), 2u);
  q.close();
  EXPECT_FALSE(q.push(4));
  EXPECT_EQ(q.pop(), 1);
  EXPECT_EQ(q.pop(), 2);
  EXPECT_EQ(q.pop(), std::nullopt);
}

TEST(BoundedQueue, BackpressureLosesNothing) {
  BoundedQueue<int> q(8);
  constexpr int kProducers = 4, kEach = 2000;
  std::vector<std::thread> producers;
  for (int p = 0; p < kProducers; ++p)
    producers.emplace_back([&, p] {
      for (int i = 0; i < kEach; ++i) ASSERT_TRUE(q.push(p * kEach + i));
    });
  std::vector<int> seen(kProducers * kEach, 0);
  for (int k = 0; k < kProducers * kEach; ++k) ++seen[static_cast<std::size_t>(*q.pop())];
  for (auto& t : producers) t.join();
  for (int s : seen) EXPECT_EQ(s, 1);
  EXPECT_LE(q.high_water_mark(), 8u);
}

TEST(BudgetTracker, StepBudgetStopsAtTheBoundary) {
  BudgetTracker b(BudgetKind::kSteps, 360);
  b.start();
  int granted = 0;
  while (b.try_consume_step()) ++granted;
  EXPECT_EQ(granted, 360);
  EXPECT_TRUE(b.exhausted());
  EXPECT_EQ(b.consumed(), 360.0);
  EXPECT_EQ(b.remaining(), 0.0);
}

TEST(BudgetTracker, EpisodeBudgetEndsAfterTheTenthEpisode) {
  BudgetTracker b(BudgetKind::kEpisodes, 10);
  b.start();
  for (int e = 0; e < 10; ++e) {
    ASSERT_TRUE(b.try_begin_episode());
    EXPECT_FALSE(b.exhausted());
    EXPECT_TRUE(b.try_consume_step());
    b.end_episode();
  }
  EXPECT_FALSE(b.try_begin_episode());
  EXPECT_TRUE(b.exhausted());
  EXPECT_EQ(b.episodes_completed(), 10u);
}

TEST(BudgetTracker, ZeroBudgetStopsImmediately) {
  for (auto kind : {BudgetKind::kSteps, BudgetKind::kEpisodes, BudgetKind::kSeconds}) {
    BudgetTracker b(kind, 0);
    b.start();
    EXPECT_TRUE(b.exhausted());
    EXPECT_FALSE(b.try_begin_episode() && b.try_consume_step());
  }
}

TEST(BudgetTracker, SecondsBudgetExpires) {
  BudgetTracker b(BudgetKind::kSeconds, 0.05);
  b.start();
  EXPECT_FALSE(b.exhausted());
  std::this_thread::sleep_for(80ms);
  EXPECT_TRUE(b.exhausted());
  EXPECT_GE(b.consumed(), 0.05);
}

TEST(BudgetTracker, ParsingAndValidation) {
  EXPECT_EQ(parse_budget_kind("steps"), BudgetKind::kSteps);
  EXPECT_EQ(parse_budget_kind("episodes"), BudgetKind::kEpisodes);
  EXPECT_EQ(parse_budget_kind("seconds"), BudgetKind::kSeconds);
  EXPECT_THROW(parse_budget_kind("hours"), ConfigError);
  EXPECT_THROW(BudgetTracker(BudgetKind::kSteps, -1), ConfigError);
  EXPECT_THROW(BudgetTracker(BudgetKind::kSteps, 2.5), ConfigError);
}

TEST(ReplayBuffer, FifoEvictionAndUniformSampling) {
  ReplayBuffer<int> buf(3);
  Rng rng(1);
  EXPECT_THROW(buf.sample(rng), StateError);
  for (int i = 0; i < 5; ++i) buf.push(i);
  EXPECT_EQ(buf.size(), 3u);
  EXPECT_EQ(buf.inserted(), 5u);
  EXPECT_EQ(buf[0], 2);
  std::vector<int> counts(5, 0);
  const int n = 30000;
  for (int k = 0; k < n; ++k) ++counts[static_cast<std::size_t>(buf.sample(rng))];
  EXPECT_EQ(counts[0] + counts[1], 0);
  for (int i = 2; i < 5; ++i) EXPECT_NEAR(counts[i] / double(n), 1.0 / 3, 4 * std::sqrt(2.0 / 9 / n));
  EXPECT_EQ(ReplayBuffer<int>().capacity(), 10000u);
}

TEST(PolicyStore, VersionsIncreaseAndSnapshotsAreImmutable) {
  PolicyStore<int> store(7);
  const auto first = store.snapshot();
  EXPECT_EQ(store.publish(8), 1u);
  EXPECT_EQ(store.publish(9), 2u);
  EXPECT_EQ(first->model, 7);
  EXPECT_EQ(first->version, 0u);
  EXPECT_EQ(store.snapshot()->model, 9);
}

TEST(ActorWorker, ScriptedSegmentOfFive) {
  Rng rng(2);
  PolicyStore<Model> store(Model(4, 1, {4}, nn::Activation::kRelu, rng));
  ActorWorker<Model, ObservationEncoder> actor(0, std::make_unique<CounterEnv>(10, 1), {}, 0);
  BudgetTracker budget(BudgetKind::kSteps, 100);
  budget.start();
  std::vector<double> finished;
  const auto seg = actor.collect(store, budget, 5, finished);
  ASSERT_TRUE(seg);
  EXPECT_EQ(seg->length(), 5u);
  EXPECT_EQ(seg->rewards, (std::vector<double>{0, 1, 2, 3, 4}));
  EXPECT_EQ(seg->behavior_log_probs, std::vector<double>(5, 0.0));
  EXPECT_FALSE(seg->terminal);
  ASSERT_TRUE(seg->bootstrap);
  EXPECT_EQ(seg->bootstrap->values, std::vector<double>(4, 5.0));
  EXPECT_EQ(seg->inputs[3].values, std::vector<double>(4, 3.0));
  EXPECT_EQ(seg->policy_version, 0u);
  EXPECT_NO_THROW(seg->validate());
}

TEST(ActorWorker, TerminalAtStepThree) {
  Rng rng(3);
  PolicyStore<Model> store(Model(4, 1, {4}, nn::Activation::kRelu, rng));
  ActorWorker<Model, ObservationEncoder> actor(0, std::make_unique<CounterEnv>(3, 1), {}, 0);
  BudgetTracker budget(BudgetKind::kSteps, 100);
  budget.start();
  std::vector<double> finished;
  const auto seg = actor.collect(store, budget, 5, finished);
  ASSERT_TRUE(seg);
  EXPECT_EQ(seg->length(), 3u);
  EXPECT_TRUE(seg->terminal);
  EXPECT_FALSE(seg->bootstrap);
  EXPECT_EQ(finished, std::vector<double>{3.0});
}

TEST(ActorWorker, WritesOneJsonLinePerTransition) {
  const auto dir = std::filesystem::temp_directory_path() / "genrl_segment_log_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  Rng rng(4);
  PolicyStore<Model> store(Model(4, 2, {4}, nn::Activation::kRelu, rng));
  {
    ActorWorker<Model, ObservationEncoder> actor(1, std::make_unique<CounterEnv>(4, 2), {}, 0, dir / "a.jsonl");
    BudgetTracker budget(BudgetKind::kSteps, 6);
    budget.start();
    std::vector<double> finished;
    while (actor.collect(store, budget, 3, finished)) {
    }
    actor.flush_log();
  }
  std::ifstream in(dir / "a.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("actor").get<int>(), 1);
    EXPECT_LE(j.at("behavior_log_prob").get<double>(), 0.0);
    ++lines;
  }
  EXPECT_EQ(lines, 6);
  std::filesystem::remove_all(dir);
}

TEST(ActorLearner, ZeroBudgetMakesNoUpdates) {
  Rng rng(5);
  auto learner = jssp_learner(rng);
  const auto before = learner.model().parameters()[0]->value();
  BudgetTracker budget(BudgetKind::kSteps, 0);
  ActorLearnerConfig cfg;
  cfg.batch = 4;
  const auto stats = run_actor_learner<Model>(learner, jssp_factory(), ObservationEncoder{}, budget, cfg);
  EXPECT_EQ(stats.updates, 0u);
  EXPECT_EQ(stats.final_version, 0u);
  EXPECT_EQ(stats.produced, 0u);
  EXPECT_EQ(learner.model().parameters()[0]->value(), before);
}

TEST(ActorLearner, SynchronousModeConservesSegments) {
  Rng rng(6);
  auto learner = jssp_learner(rng);
  BudgetTracker budget(BudgetKind::kSteps, 500);
  ActorLearnerConfig cfg;
  cfg.synchronous = true;
  cfg.actors = 1;
  cfg.batch = 4;
  cfg.segment_length = 5;
  const auto stats = run_actor_learner<Model>(learner, jssp_factory(), ObservationEncoder{}, budget, cfg);
  EXPECT_EQ(stats.consumed, stats.produced);
  EXPECT_EQ(stats.queued, 0u);
  EXPECT_EQ(stats.discarded, 0u);
  EXPECT_EQ(stats.env_steps, 500u);
  EXPECT_EQ(stats.final_version, stats.updates);
  EXPECT_EQ(stats.max_lag, 0u);
}

TEST(ActorLearner, ParallelActorsConserveSegmentsAndLag) {
  Rng rng(7);
  auto learner = jssp_learner(rng);
  BudgetTracker budget(BudgetKind::kSteps, 4000);
  ActorLearnerConfig cfg;
  cfg.actors = 4;
  cfg.batch = 4;
  cfg.segment_length = 5;
  const auto stats = run_actor_learner<Model>(learner, jssp_factory(), ObservationEncoder{}, budget, cfg);
  EXPECT_EQ(stats.consumed + stats.queued, stats.produced);
  EXPECT_EQ(stats.env_steps, 4000u);
  EXPECT_GT(stats.updates, 0u);
  EXPECT_GT(stats.mean_lag, 0.0);
  EXPECT_LE(stats.queue_high_water, cfg.queue_capacity);
  EXPECT_EQ(stats.final_version, stats.updates);
}

TEST(ActorLearner, EpisodeBudgetCompletesExactly) {
  Rng rng(8);
  auto learner = jssp_learner(rng);
  BudgetTracker budget(BudgetKind::kEpisodes, 10);
  ActorLearnerConfig cfg;
  cfg.actors = 3;
  cfg.batch = 2;
  const auto stats = run_actor_learner<Model>(learner, jssp_factory(), ObservationEncoder{}, budget, cfg);
  EXPECT_EQ(stats.episodes, 10u);
  EXPECT_EQ(stats.episode_returns.size(), 10u);
  EXPECT_EQ(stats.env_steps, 90u);
}

TEST(FinetuneMgdt, ZeroBudgetLeavesModelUnchanged) {
  Rng rng(9);
  seq::SequenceModel model(counter_spec(), rng);
  const auto before = model.parameters()[0]->value();
  CounterEnv env(4, 2);
  TokenEncoder encoder(1, 2, seq::ReturnQuantizer(-1, 10, 8), 6.0);
  BudgetTracker budget(BudgetKind::kSteps, 0);
  MgdtFinetuneConfig cfg;
  cfg.maent.batch = 4;
  cfg.maent.context = 2;
  const auto stats = finetune_mgdt(model, env, encoder, budget, cfg);
  EXPECT_EQ(stats.updates, 0u);
  EXPECT_EQ(model.parameters()[0]->value(), before);
}

TEST(FinetuneMgdt, BufferStaysWithinCapacity) {
  Rng rng(10);
  seq::SequenceModel model(counter_spec(), rng);
  CounterEnv env(4, 2);
  TokenEncoder encoder(1, 2, seq::ReturnQuantizer(-1, 10, 8), 6.0);
  BudgetTracker budget(BudgetKind::kSteps, 200);
  MgdtFinetuneConfig cfg;
  cfg.maent.batch = 4;
  cfg.maent.context = 2;
  cfg.maent.updates_between_rollouts = 3;
  cfg.rollout_episodes = 2;
  ReplayBuffer<TokenEpisode> buffer(5);
  const auto stats = finetune_mgdt(model, env, encoder, budget, cfg, &buffer);
  EXPECT_LE(buffer.size(), 5u);
  EXPECT_GT(buffer.inserted(), 5u);
  EXPECT_EQ(stats.env_steps, 200u);
  EXPECT_GT(stats.updates, 0u);
  EXPECT_EQ(stats.nll.size(), stats.updates);
  for (double l : stats.lambda) EXPECT_GE(l, 0.0);
}

TEST(TokenEpisode, ReturnTokensAreHindsightReturnsToGo) {
  const std::vector<Observation> obs(3, Observation(2, 2, {0, 1, 2, 3}));
  const seq::ReturnQuantizer q(0.0, 10.0, 10);
  const auto ep = make_token_episode(obs, {0, 1, 0}, {1.0, 2.0, 4.0}, {}, 1, q, true);
  ASSERT_EQ(ep.steps.size(), 3u);
  EXPECT_EQ(ep.steps[0].return_bin, q.quantize(7.0));
  EXPECT_EQ(ep.steps[1].return_bin, q.quantize(6.0));
  EXPECT_EQ(ep.steps[2].return_bin, q.quantize(4.0));
  EXPECT_EQ(ep.episode_return, 7.0);
  Rng rng(11);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(sample_window(ep, 2, rng).length(), 2u);
  EXPECT_EQ(sample_window(ep, 5, rng).length(), 3u);
}
