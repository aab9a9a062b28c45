#include "genrl/harness/evaluation.hpp"

#include <chrono>
#include <numeric>

#include "genrl/env/blockmaze.hpp"
#include "genrl/env/jssp.hpp"
#include "genrl/env/pacgrid.hpp"
#include "genrl/errors.hpp"

namespace genrl::harness {

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::uint64_t episode_seed(std::uint64_t eval_seed, std::uint64_t episode) {
  return mix64(eval_seed ^ mix64(episode + 1));
}

struct EpisodeOutcome {
  double ret = 0.0;
  std::uint64_t steps = 0;
  bool finished = false;
};

/// Plays one episode, stopping early once `step_limit` steps were taken.
template <class OnStep>
EpisodeOutcome play(Environment& env, Controller& ctrl, Rng& rng, std::uint64_t reset_seed, std::uint64_t step_limit,
                    OnStep on_step) {
  EpisodeOutcome out;
  Observation obs = env.reset(reset_seed);
  ActionMask mask = env.action_mask();
  ctrl.reset(env, obs, mask);
  while (out.steps < step_limit) {
    const int a = ctrl.act(mask, rng);
    const StepResult r = env.step(a);
    ++out.steps;
    out.ret += r.reward;
    on_step(r);
    if (r.done) {
      out.finished = true;
      break;
    }
    mask = env.action_mask();
    ctrl.advance(a, r.reward, r.observation, mask);
  }
  return out;
}

}  // namespace

EvalResult evaluate(const Agent& agent, const EnvSuite& suite, const EvalConfig& cfg, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  EvalResult res;
  auto env = suite.make_target();
  auto ctrl = agent.controller();
  Rng rng(mix64(cfg.seed) ^ seed, 0x6576616c);
  switch (suite.kind()) {
    case EnvKind::kBlockmaze: {
      auto& maze = dynamic_cast<env::Blockmaze&>(*env);
      env::BugCensus census(maze.spec());
      const std::uint64_t total = cfg.scaled_blockmaze_steps();
      std::vector<double> partial;
      for (std::uint64_t ep = 0; res.steps < total; ++ep) {
        const auto o = play(maze, *ctrl, rng, episode_seed(cfg.seed, ep), total - res.steps,
                            [&](const StepResult& r) { census.record(r.events); });
        res.steps += o.steps;
        (o.finished ? res.episode_returns : partial).push_back(o.ret);
      }
      // Only an evaluation too short to finish any episode reports a partial one.
      if (res.episode_returns.empty()) res.episode_returns = partial;
      res.metrics["bugs_type1"] = static_cast<double>(census.distinct(env::BugType::kExploratory));
      res.metrics["bugs_type2"] = static_cast<double>(census.distinct(env::BugType::kInvalidLocation));
      break;
    }
    case EnvKind::kPacGrid: {
      auto& pac = dynamic_cast<env::PacGrid&>(*env);
      pac.begin_evaluation();
      env::GateCensus census;
      const std::size_t episodes = cfg.scaled_pacgrid_episodes();
      for (std::size_t ep = 0; ep < episodes; ++ep) {
        const auto o = play(pac, *ctrl, rng, episode_seed(cfg.seed, ep), std::numeric_limits<std::uint64_t>::max(),
                            [&](const StepResult& r) { census.record(r.events); });
        census.end_episode();
        res.steps += o.steps;
        res.episode_returns.push_back(o.ret);
      }
      for (std::size_t g = 0; g < 4; ++g) {
        res.metrics["gate_" + std::to_string(g + 1)] = static_cast<double>(census.entries()[g]);
      }
      break;
    }
    case EnvKind::kJssp: {
      auto& jssp = dynamic_cast<env::JsspEnv&>(*env);
      std::vector<double> makespans;
      for (std::size_t i = 0; i < cfg.jssp_instances; ++i) {
        const auto o = play(jssp, *ctrl, rng, episode_seed(cfg.seed, i), std::numeric_limits<std::uint64_t>::max(),
                            [](const StepResult&) {});
        res.steps += o.steps;
        res.episode_returns.push_back(o.ret);
        makespans.push_back(static_cast<double>(jssp.makespan()));
      }
      res.metrics["makespan"] = mean(makespans);
      break;
    }
  }
  res.metrics["cumulative_reward"] = mean(res.episode_returns);
  res.test_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace genrl::harness
