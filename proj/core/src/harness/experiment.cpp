#include "genrl/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "genrl/errors.hpp"
#include "genrl/harness/agents.hpp"
#include "genrl/harness/evaluation.hpp"
#include "genrl/harness/suite.hpp"

namespace genrl::harness {

namespace {

std::vector<std::string> pick(const std::vector<std::string>& configured, const std::vector<std::string>& subset,
                              const std::vector<std::string>& known, const char* what) {
  if (subset.empty()) return configured;
  for (const auto& s : subset) {
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      throw ConfigError(std::string("unknown ") + what + " '" + s + "'");
    }
  }
  return subset;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw StateError("cannot write " + p.string());
  out << text;
}

struct Job {
  std::string agent;
  std::size_t seed_index = 0;
};

}  // namespace

std::uint64_t run_seed(const ExperimentConfig& cfg, std::size_t k) { return cfg.run.seed + k; }

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentOptions& options) {
  const auto agents = pick(cfg.agent.list, options.agents, known_agents(), "agent");
  const auto budgets = pick(cfg.budget.list, options.budgets, known_budgets(), "budget");
  const EnvSuite suite(cfg);
  const bool persist = !options.out_dir.empty();
  const std::string canonical = cfg.source.canonical();
  const std::string fingerprint = fingerprint_of(canonical);
  const std::string env_name = to_string(cfg.env.kind);
  const std::filesystem::path runs_path = options.out_dir / "runs.jsonl";
  if (persist) {
    std::filesystem::create_directories(options.out_dir);
    write_text(options.out_dir / "config.txt", canonical);
    write_text(options.out_dir / "fingerprint", fingerprint + "\n");
    if (options.stage != Stage::kPretrain) write_text(runs_path, "");
  }

  std::vector<Job> jobs;
  for (const auto& a : agents) {
    for (std::size_t k = 0; k < cfg.run.seeds; ++k) jobs.push_back({a, k});
  }
  // Slot per (job, budget) keeps the output order independent of scheduling.
  std::vector<std::vector<RunRecord>> slots(jobs.size());
  std::mutex io_mu;
  std::atomic<std::size_t> next{0};

  auto run_job = [&](const Job& job) {
    const std::uint64_t seed = run_seed(cfg, job.seed_index);
    const std::filesystem::path ckpt_dir =
        options.out_dir / "checkpoints" / job.agent / ("seed" + std::to_string(job.seed_index));
    std::vector<RunRecord> out;
    auto base_record = [&](const std::string& budget) {
      RunRecord r;
      r.run_id = env_name + "/" + job.agent + "/" + budget + "/seed" + std::to_string(job.seed_index);
      r.fingerprint = fingerprint;
      r.config = canonical;
      r.env = env_name;
      r.agent = job.agent;
      r.budget = budget;
      r.seed = seed;
      r.budget_kind = runtime::to_string(cfg.budget.kind);
      r.budget_amount = cfg.budget.amount(budget);
      return r;
    };
    auto finish = [&](RunRecord r) {
      if (persist && options.stage != Stage::kPretrain) {
        std::lock_guard lock(io_mu);
        append_record(runs_path, r);
      }
      out.push_back(std::move(r));
    };

    std::unique_ptr<Agent> base;
    try {
      base = make_agent(job.agent, cfg, suite, seed);
      const auto pre_path = ckpt_dir / "pretrained.ckpt";
      if (options.reuse_checkpoints && persist && std::filesystem::exists(pre_path)) {
        load_agent(*base, pre_path);
      } else if (cfg.pretrain.enabled) {
        base->pretrain(seed);
        if (persist) save_agent(*base, pre_path);
      }
    } catch (const std::exception& e) {
      for (const auto& b : budgets) {
        RunRecord r = base_record(b);
        r.status = "failed";
        r.error = std::string("pretrain: ") + e.what();
        finish(std::move(r));
      }
      return out;
    }
    if (options.stage == Stage::kPretrain) return out;

    for (const auto& budget : budgets) {
      RunRecord r = base_record(budget);
      try {
        auto agent = base->clone();
        if (persist && cfg.run.log_segments) {
          agent->set_log_dir(options.out_dir / "logs" / job.agent / budget / ("seed" + std::to_string(job.seed_index)));
        }
        const auto ft_path = ckpt_dir / (budget + ".ckpt");
        if (options.reuse_checkpoints && persist && std::filesystem::exists(ft_path)) {
          const auto meta = load_agent(*agent, ft_path);
          const auto get = [&](const char* k) { return meta.count(k) ? meta.at(k) : 0.0; };
          r.budget_consumed = get("budget_consumed");
          r.updates = static_cast<std::uint64_t>(get("updates"));
          r.finetune_steps = static_cast<std::uint64_t>(get("env_steps"));
          r.finetune_episodes = static_cast<std::uint64_t>(get("episodes"));
          r.train_seconds = get("train_seconds");
        } else {
          // A zero budget skips fine-tuning entirely.
          if (r.budget_amount > 0.0) {
            runtime::BudgetTracker tracker(cfg.budget.kind, r.budget_amount);
            const TrainStats s = agent->finetune(tracker, seed);
            r.budget_consumed = tracker.consumed();
            r.updates = s.updates;
            r.finetune_steps = s.env_steps;
            r.finetune_episodes = s.episodes;
            r.train_seconds = s.train_seconds;
          }
          if (persist) {
            save_agent(*agent, ft_path,
                       {{"budget_consumed", r.budget_consumed},
                        {"updates", static_cast<double>(r.updates)},
                        {"env_steps", static_cast<double>(r.finetune_steps)},
                        {"episodes", static_cast<double>(r.finetune_episodes)},
                        {"train_seconds", r.train_seconds}});
          }
        }
        if (options.stage == Stage::kEvaluate) {
          const EvalResult ev = evaluate(*agent, suite, cfg.eval, seed);
          r.metrics = ev.metrics;
          r.episode_returns = ev.episode_returns;
          r.test_seconds = ev.test_seconds;
        }
      } catch (const std::exception& e) {
        r.status = "failed";
        r.error = e.what();
      }
      finish(std::move(r));
    }
    return out;
  };

  const std::size_t threads = std::min(cfg.run.threads, std::max<std::size_t>(jobs.size(), 1));
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) slots[i] = run_job(jobs[i]);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentResult res;
  // Order by agent, budget, seed.
  for (const auto& agent : agents) {
    for (const auto& budget : budgets) {
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (jobs[j].agent != agent) continue;
        for (const auto& r : slots[j]) {
          if (r.budget == budget) res.records.push_back(r);
        }
      }
    }
  }
  res.failures = static_cast<std::size_t>(
      std::count_if(res.records.begin(), res.records.end(), [](const RunRecord& r) { return r.status != "ok"; }));
  res.table = build_report(res.records);
  if (persist && options.stage == Stage::kEvaluate) write_report(res.records, options.out_dir);
  return res;
}

}  // namespace genrl::harness
