#include <cstdio>
#include <filesystem>
#include <optional>
#include <set>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "genrl/env/jssp.hpp"
#include "genrl/errors.hpp"
#include "genrl/harness/config.hpp"
#include "genrl/harness/experiment.hpp"
#include "genrl/harness/record.hpp"
#include "genrl/harness/report.hpp"
#include "genrl/harness/stats.hpp"
#include "json.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace genrl;

int fail(const std::string& category, const std::string& message, int code) {
  std::cerr << json{{"error", {{"category", category}, {"message", message}}}}.dump() << '\n';
  return code;
}

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out = "runs/latest";
  std::optional<std::uint64_t> seed;
  std::optional<double> eval_scale;
  std::string agents;
  std::string budgets;
};

harness::ExperimentConfig load_config(const Common& c) {
  harness::ConfigMap map = c.config.empty() ? harness::ConfigMap() : harness::ConfigMap::load(c.config);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    map.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) {
    map.set("run.seed", std::to_string(*c.seed));
    map.set("run.seeds", "1");
  }
  if (c.eval_scale) {
    std::ostringstream ss;
    ss.precision(17);
    ss << *c.eval_scale;
    map.set("eval.scale", ss.str());
  }
  return harness::ExperimentConfig::from(map);
}

/// Checkpoints in the run directory are reused only when they were produced
/// under the same configuration.
bool same_fingerprint(const std::filesystem::path& out, const std::string& fp) {
  std::ifstream in(out / "fingerprint");
  std::string stored;
  return in && (in >> stored) && stored == fp;
}

int run_stage(const Common& c, harness::Stage stage) {
  const auto cfg = load_config(c);
  harness::ExperimentOptions opt;
  opt.stage = stage;
  opt.out_dir = c.out;
  opt.agents = harness::split_list(c.agents);
  opt.budgets = harness::split_list(c.budgets);
  opt.reuse_checkpoints = stage != harness::Stage::kPretrain && same_fingerprint(opt.out_dir, cfg.source.fingerprint());
  const auto res = harness::run_experiment(cfg, opt);
  if (stage == harness::Stage::kEvaluate) {
    std::cout << harness::report_text(res.table, harness::to_string(cfg.env.kind));
  }
  json summary{{"stage", stage == harness::Stage::kPretrain   ? "pretrain"
                         : stage == harness::Stage::kFinetune ? "finetune"
                                                              : "evaluate"},
               {"out", c.out},
               {"fingerprint", cfg.source.fingerprint()},
               {"records", res.records.size()},
               {"failures", res.failures}};
  std::cout << summary.dump() << '\n';
  if (res.failures) {
    for (const auto& r : res.records) {
      if (r.status != "ok") return fail("run", r.run_id + ": " + r.error, 1);
    }
  }
  return 0;
}

int run_report(const Common& c) {
  const std::filesystem::path dir = c.out;
  const auto records = harness::read_records(dir / "runs.jsonl");
  for (const auto& r : records) {
    if (!r.fingerprint_matches()) return fail("contract", "fingerprint mismatch in " + r.run_id, 1);
  }
  const auto written = harness::write_report(records, dir);
  const auto table = harness::build_report(records);
  std::set<std::string> envs;
  for (const auto& r : table.rows) envs.insert(r.env);
  for (const auto& e : envs) std::cout << harness::report_text(table, e);
  json files = json::array();
  for (const auto& p : written) files.push_back(p.string());
  std::cout << json{{"records", records.size()}, {"files", files}}.dump() << '\n';
  return 0;
}

std::vector<double> parse_sample(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : harness::split_list(s)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "'");
    }
  }
  return out;
}

json schedule_json(const env::ScheduleResult& r) {
  return json{{"makespan", r.makespan}, {"dispatch_order", r.dispatch_order}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"genrl: generalist-agent fine-tuning experiments"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Configuration file (key = value lines)");
    sub->add_option("--set", common.overrides, "Override a configuration key (key=value)");
    sub->add_option("--out", common.out, "Run directory");
    sub->add_option("--seed", common.seed, "Run a single seed");
    sub->add_option("--eval-scale", common.eval_scale, "Evaluation length scale");
    sub->add_option("--agents", common.agents, "Comma-separated agent subset");
    sub->add_option("--budgets", common.budgets, "Comma-separated budget subset");
  };
  auto* pretrain = app.add_subcommand("pretrain", "Pre-train agents and save checkpoints");
  auto* finetune = app.add_subcommand("finetune", "Fine-tune agents for each budget");
  auto* evaluate = app.add_subcommand("evaluate", "Run the full protocol and write the report");
  auto* report = app.add_subcommand("report", "Rebuild report files from runs.jsonl");
  for (auto* s : {pretrain, finetune, evaluate}) add_common(s);
  report->add_option("--out", common.out, "Run directory");

  auto* oracle = app.add_subcommand("oracle", "Exact reference computations");
  oracle->require_subcommand(1);
  auto* jssp = oracle->add_subcommand("jssp", "Optimal makespan by exhaustive search (at most 12 operations)");
  std::string instance_path;
  int jobs = 2;
  int machines = 2;
  std::int64_t low = 1;
  std::int64_t high = 9;
  std::uint64_t inst_seed = 0;
  jssp->add_option("--instance", instance_path, "Instance file in Taillard text format");
  jssp->add_option("--jobs", jobs, "Jobs of a generated instance");
  jssp->add_option("--machines", machines, "Machines of a generated instance");
  jssp->add_option("--low", low, "Minimum processing time");
  jssp->add_option("--high", high, "Maximum processing time");
  jssp->add_option("--seed", inst_seed, "Generator seed");
  auto* cles_cmd = oracle->add_subcommand("cles", "Common-language effect size of two samples");
  std::string sample_a;
  std::string sample_b;
  cles_cmd->add_option("--a", sample_a, "First sample, comma separated")->required();
  cles_cmd->add_option("--b", sample_b, "Second sample, comma separated")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*pretrain) return run_stage(common, harness::Stage::kPretrain);
    if (*finetune) return run_stage(common, harness::Stage::kFinetune);
    if (*evaluate) return run_stage(common, harness::Stage::kEvaluate);
    if (*report) return run_report(common);
    if (*jssp) {
      env::JsspInstance inst;
      if (!instance_path.empty()) {
        std::ifstream in(instance_path);
        if (!in) throw ConfigError("cannot open " + instance_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        inst = env::parse_instance(ss.str());
      } else {
        inst = env::generate_taillard(jobs, machines, low, high, inst_seed);
      }
      json out{{"instance", env::format_instance(inst)}, {"optimal", schedule_json(env::brute_force_optimal(inst))}};
      for (auto rule : {env::DispatchRule::kSpt, env::DispatchRule::kLpt, env::DispatchRule::kMwr, env::DispatchRule::kFifo}) {
        out["pdr"][env::to_string(rule)] = schedule_json(env::classic_pdr(inst, rule));
      }
      std::cout << out.dump() << '\n';
      return 0;
    }
    if (*cles_cmd) {
      const auto a = parse_sample(sample_a);
      const auto b = parse_sample(sample_b);
      if (a.empty() || b.empty()) throw ConfigError("cles needs two nonempty samples");
      std::cout << json{{"cles_ab", harness::cles(a, b)}, {"cles_ba", harness::cles(b, a)}}.dump() << '\n';
      return 0;
    }
  } catch (const Error& e) {
    return fail(e.category(), e.what(), e.category() == std::string("config") ? 2 : 1);
  } catch (const std::exception& e) {
    return fail("error", e.what(), 1);
  }
  return 0;
}
