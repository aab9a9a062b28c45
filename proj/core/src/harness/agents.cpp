#include "genrl/harness/agents.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <optional>

#include "genrl/errors.hpp"
#include "genrl/learners/dqn.hpp"
#include "genrl/learners/model.hpp"
#include "genrl/learners/ppo.hpp"
#include "genrl/learners/vtrace_learner.hpp"
#include "genrl/nn/optim.hpp"
#include "genrl/runtime/actor_learner.hpp"
#include "genrl/runtime/dqn_loop.hpp"
#include "genrl/runtime/encoders.hpp"
#include "genrl/runtime/mgdt.hpp"
#include "genrl/seq/maent.hpp"
#include "genrl/seq/model.hpp"

namespace genrl::harness {

namespace {

int random_allowed(const ActionMask& mask, std::size_t actions, Rng& rng) {
  std::vector<int> allowed;
  for (std::size_t a = 0; a < actions; ++a) {
    if (action_allowed(mask, a)) allowed.push_back(static_cast<int>(a));
  }
  if (allowed.empty()) throw ContractError("no allowed action");
  return allowed[rng.below(allowed.size())];
}

/// Samples from the policy at a temperature, or acts epsilon-greedily on the
/// logits read as action values.
template <learners::PolicyModel M, runtime::InputEncoder E>
class ModelController final : public Controller {
 public:
  ModelController(M model, E encoder, bool greedy, double temperature, double epsilon)
      : model_(std::move(model)),
        encoder_(std::move(encoder)),
        greedy_(greedy),
        temperature_(temperature),
        epsilon_(epsilon) {}

  void reset(const Environment& env, const Observation& obs, const ActionMask& mask) override {
    x_ = encoder_.reset(env, obs, mask);
  }

  int act(const ActionMask& mask, Rng& rng) override {
    if (!x_) throw StateError("controller: act before reset");
    if (!greedy_) {
      return static_cast<int>(learners::policy_of(model_, *x_, mask, temperature_).sample(rng));
    }
    if (rng.bernoulli(epsilon_)) return random_allowed(mask, model_.action_count(), rng);
    auto out = model_.infer(std::span<const typename E::Input>(&*x_, 1));
    learners::apply_masks(out.logits, std::span<const ActionMask>(&mask, 1));
    const auto row = out.logits.row_span(0);
    return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }

  void advance(int action, double reward, const Observation& obs, const ActionMask& mask) override {
    x_ = encoder_.advance(action, reward, obs, mask);
  }

 private:
  M model_;
  E encoder_;
  bool greedy_;
  double temperature_;
  double epsilon_;
  std::optional<typename E::Input> x_;
};

runtime::ActorLearnerConfig actor_config(const AgentConfig& a, std::uint64_t seed, const std::filesystem::path& logs) {
  runtime::ActorLearnerConfig c;
  c.actors = a.actors;
  c.synchronous = a.synchronous;
  c.segment_length = a.segment_length;
  c.queue_capacity = a.queue_capacity;
  c.batch = a.batch;
  c.seed = seed;
  c.log_dir = logs;
  return c;
}

learners::PpoConfig ppo_config(const AgentConfig& a) {
  learners::PpoConfig c;
  c.clip = a.ppo_clip;
  c.epochs = static_cast<int>(a.ppo_epochs);
  c.gamma = a.gamma;
  c.gae_lambda = a.gae_lambda;
  c.entropy_coef = a.ppo_entropy;
  return c;
}

template <class Stats>
TrainStats from_loop(const Stats& s) {
  TrainStats t;
  t.updates = s.updates;
  t.env_steps = s.env_steps;
  t.episodes = s.episodes;
  t.train_seconds = s.train_seconds;
  t.episode_returns = s.episode_returns;
  return t;
}

class ImpalaAgent final : public Agent {
 public:
  ImpalaAgent(std::string tag, bool vtrace, const ExperimentConfig& cfg, const EnvSuite& suite, std::uint64_t seed)
      : tag_(std::move(tag)), vtrace_(vtrace), cfg_(&cfg), suite_(&suite) {
    Rng rng(seed, 0x696d70616c61);
    model_ = learners::MlpModel(suite.observation_shape().size(), suite.action_count(), cfg.agent.hidden,
                                nn::Activation::kRelu, rng, "impala");
  }

  const std::string& tag() const override { return tag_; }
  std::unique_ptr<Agent> clone() const override { return std::make_unique<ImpalaAgent>(*this); }

  TrainStats pretrain(std::uint64_t seed) override {
    runtime::BudgetTracker budget(runtime::BudgetKind::kSteps, static_cast<double>(cfg_->pretrain.steps));
    const auto family = suite_->make_family(cfg_->pretrain.variants);
    return train([&](std::size_t) { return family->clone(); }, budget, seed, {});
  }

  TrainStats finetune(runtime::BudgetTracker& budget, std::uint64_t seed) override {
    return train([this](std::size_t) { return suite_->make_target(); }, budget, seed, log_dir_);
  }

  std::unique_ptr<Controller> controller() const override {
    return std::make_unique<ModelController<learners::MlpModel, runtime::ObservationEncoder>>(
        model_, runtime::ObservationEncoder{}, false, cfg_->eval.temperature, 0.0);
  }

  std::vector<nn::Parameter*> parameters() override { return model_.parameters(); }

 private:
  TrainStats train(const runtime::EnvFactory& make_env, runtime::BudgetTracker& budget, std::uint64_t seed,
                   const std::filesystem::path& logs) {
    const AgentConfig& a = cfg_->agent;
    const auto al = actor_config(a, seed, logs);
    auto opt = std::make_unique<nn::RmsProp>(nn::RmsPropOptions{a.impala_lr, 0.99, 0.01});
    runtime::ActorLearnerStats s;
    if (vtrace_) {
      vtrace::VTraceConfig vc;
      vc.rho_bar = a.rho_bar;
      vc.c_bar = a.c_bar;
      vc.gamma = a.gamma;
      vc.baseline_cost = a.baseline_cost;
      vc.entropy_cost = a.entropy_cost;
      learners::VTraceLearner<learners::MlpModel> learner(model_, vc, std::move(opt));
      s = runtime::run_actor_learner<learners::MlpModel>(learner, make_env, runtime::ObservationEncoder{}, budget, al);
      model_ = learner.model();
    } else {
      learners::PpoLearner<learners::MlpModel> learner(model_, ppo_config(a), std::move(opt));
      s = runtime::run_actor_learner<learners::MlpModel>(learner, make_env, runtime::ObservationEncoder{}, budget, al);
      model_ = learner.model();
    }
    return from_loop(s);
  }

  std::string tag_;
  bool vtrace_;
  const ExperimentConfig* cfg_;
  const EnvSuite* suite_;
  learners::MlpModel model_;
};

enum class MgdtMode { kMaent, kDqn, kPpo };

class MgdtAgent final : public Agent {
 public:
  MgdtAgent(std::string tag, MgdtMode mode, const ExperimentConfig& cfg, const EnvSuite& suite, std::uint64_t seed)
      : tag_(std::move(tag)), mode_(mode), cfg_(&cfg), suite_(&suite), target_(suite.target_return()) {
    const AgentConfig& a = cfg.agent;
    seq::SequenceModelSpec spec;
    spec.patch_count = suite.patch_count(a.patches);
    spec.patch_size = suite.observation_shape().size() / spec.patch_count;
    spec.action_count = suite.action_count();
    spec.return_bins = a.return_bins;
    spec.context = a.context;
    spec.embed = a.embed;
    spec.heads = a.heads;
    spec.layers = a.layers;
    Rng rng(seed, 0x6d676474);
    model_ = std::make_shared<seq::SequenceModel>(spec, rng);
  }

  MgdtAgent(const MgdtAgent& o)
      : Agent(o),
        tag_(o.tag_),
        mode_(o.mode_),
        cfg_(o.cfg_),
        suite_(o.suite_),
        target_(o.target_),
        model_(std::make_shared<seq::SequenceModel>(*o.model_)) {}

  const std::string& tag() const override { return tag_; }
  std::unique_ptr<Agent> clone() const override { return std::make_unique<MgdtAgent>(*this); }

  /// Behaviour cloning on noisy heuristic demonstrations from the family.
  TrainStats pretrain(std::uint64_t seed) override {
    const PretrainConfig& p = cfg_->pretrain;
    const AgentConfig& a = cfg_->agent;
    TrainStats stats;
    if (p.demos == 0 || p.updates == 0) return stats;
    const auto start = std::chrono::steady_clock::now();
    auto env = suite_->make_family(p.variants);
    Rng rng(seed, 0x64656d6f);
    const auto range = suite_->range_fn(a.return_bins);
    std::vector<runtime::TokenEpisode> demos;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < p.demos; ++d) {
      std::vector<Observation> obs;
      std::vector<int> actions;
      std::vector<double> rewards;
      std::vector<ActionMask> masks;
      Observation o = env->reset(mix64(seed ^ mix64(d + 1)));
      while (!env->done()) {
        const ActionMask mask = env->action_mask();
        const int act = rng.bernoulli(0.1) ? random_allowed(mask, env->action_count(), rng) : suite_->expert_action(*env);
        StepResult r = env->step(act);
        obs.push_back(std::move(o));
        actions.push_back(act);
        rewards.push_back(r.reward);
        masks.push_back(mask);
        o = std::move(r.observation);
        ++stats.env_steps;
      }
      const auto q = range ? range(*env) : suite_->quantizer(a.return_bins);
      demos.push_back(runtime::make_token_episode(obs, actions, rewards, masks, model_->spec().patch_count, q, true));
      best = std::max(best, demos.back().episode_return);
      stats.episode_returns.push_back(demos.back().episode_return);
      ++stats.episodes;
    }
    seq::MaentConfig mc = maent_config();
    mc.dual_lr = 0.0;
    mc.lambda_init = 0.0;
    seq::MaentTrainer trainer(mc);
    std::vector<seq::TokenSequence> batch;
    for (std::size_t u = 0; u < p.updates; ++u) {
      batch.clear();
      for (std::size_t b = 0; b < a.batch; ++b) {
        batch.push_back(runtime::sample_window(demos[rng.below(demos.size())], a.context, rng));
      }
      trainer.update(*model_, batch);
      ++stats.updates;
    }
    // JSSP conditions on the per-instance bound, so its target stays at 0.
    if (suite_->kind() != EnvKind::kJssp && !cfg_->agent.target_return) target_ = std::max(target_, best);
    stats.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return stats;
  }

  TrainStats finetune(runtime::BudgetTracker& budget, std::uint64_t seed) override {
    const AgentConfig& a = cfg_->agent;
    auto enc = encoder();
    switch (mode_) {
      case MgdtMode::kMaent: {
        auto env = suite_->make_target();
        runtime::MgdtFinetuneConfig fc;
        fc.maent = maent_config();
        fc.seed = seed;
        const auto s = runtime::finetune_mgdt(*model_, *env, enc, budget, fc);
        target_ = enc.target_return();
        return from_loop(s);
      }
      case MgdtMode::kDqn: {
        auto env = suite_->make_target();
        learners::DqnConfig dc;
        dc.epsilon_start = a.eps_start;
        dc.epsilon_end = a.eps_end;
        dc.decay_horizon = a.eps_decay;
        dc.gamma = a.gamma;
        dc.target_sync_interval = a.target_sync;
        dc.batch = a.batch;
        learners::DqnLearner<seq::SequenceModel> learner(*model_, dc, optimizer());
        runtime::DqnLoopConfig lc;
        lc.replay_capacity = a.replay;
        lc.warmup_steps = a.dqn_warmup;
        lc.seed = seed;
        const auto s = runtime::run_dqn(learner, *env, enc, budget, lc);
        *model_ = learner.model();
        return from_loop(s);
      }
      case MgdtMode::kPpo: {
        learners::PpoLearner<seq::SequenceModel> learner(*model_, ppo_config(a), optimizer());
        const auto s = runtime::run_actor_learner<seq::SequenceModel>(
            learner, [this](std::size_t) { return suite_->make_target(); }, enc, budget,
            actor_config(a, seed, log_dir_));
        *model_ = learner.model();
        return from_loop(s);
      }
    }
    throw ContractError("unknown agent mode");
  }

  std::unique_ptr<Controller> controller() const override {
    const bool greedy = mode_ == MgdtMode::kDqn;
    return std::make_unique<ModelController<seq::SequenceModel, runtime::TokenEncoder>>(
        *model_, encoder(), greedy, cfg_->eval.temperature, cfg_->eval.epsilon);
  }

  std::vector<nn::Parameter*> parameters() override { return model_->parameters(); }
  nn::CheckpointMeta state() const override { return {{"target_return", target_}}; }
  void restore(const nn::CheckpointMeta& meta) override {
    if (auto it = meta.find("target_return"); it != meta.end()) target_ = it->second;
  }

 private:
  runtime::TokenEncoder encoder() const {
    const AgentConfig& a = cfg_->agent;
    return runtime::TokenEncoder(model_->spec().patch_count, a.context, suite_->quantizer(a.return_bins), target_,
                                 suite_->range_fn(a.return_bins));
  }

  seq::MaentConfig maent_config() const {
    const AgentConfig& a = cfg_->agent;
    seq::MaentConfig mc;
    mc.beta = a.beta;
    mc.dual_lr = a.dual_lr;
    mc.batch = a.batch;
    mc.context = a.context;
    mc.buffer_capacity = a.buffer;
    mc.updates_between_rollouts = a.updates_between_rollouts;
    mc.optimizer = nn::AdamWOptions{a.mgdt_lr, a.mgdt_weight_decay};
    return mc;
  }

  std::unique_ptr<nn::Optimizer> optimizer() const {
    return std::make_unique<nn::AdamW>(nn::AdamWOptions{cfg_->agent.mgdt_lr, cfg_->agent.mgdt_weight_decay});
  }

  std::string tag_;
  MgdtMode mode_;
  const ExperimentConfig* cfg_;
  const EnvSuite* suite_;
  double target_;
  std::shared_ptr<seq::SequenceModel> model_;
};

}  // namespace

std::unique_ptr<Agent> make_agent(const std::string& tag, const ExperimentConfig& cfg, const EnvSuite& suite,
                                  std::uint64_t seed) {
  if (tag == kImpalaVTrace) return std::make_unique<ImpalaAgent>(tag, true, cfg, suite, seed);
  if (tag == kImpalaPpo) return std::make_unique<ImpalaAgent>(tag, false, cfg, suite, seed);
  if (tag == kMgdtMaent) return std::make_unique<MgdtAgent>(tag, MgdtMode::kMaent, cfg, suite, seed);
  if (tag == kMgdtDqn) return std::make_unique<MgdtAgent>(tag, MgdtMode::kDqn, cfg, suite, seed);
  if (tag == kMgdtPpo) return std::make_unique<MgdtAgent>(tag, MgdtMode::kPpo, cfg, suite, seed);
  throw ConfigError("unknown agent '" + tag + "'");
}

void save_agent(Agent& agent, const std::filesystem::path& path, nn::CheckpointMeta extra) {
  for (const auto& [k, v] : agent.state()) extra[k] = v;
  const auto params = agent.parameters();
  const std::vector<const nn::Parameter*> view(params.begin(), params.end());
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  nn::save_checkpoint(path, view, extra);
}

nn::CheckpointMeta load_agent(Agent& agent, const std::filesystem::path& path) {
  const auto params = agent.parameters();
  auto meta = nn::load_checkpoint(path, params);
  agent.restore(meta);
  return meta;
}

}  // namespace genrl::harness
