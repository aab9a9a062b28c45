#include "genrl/harness/record.hpp"

#include <fstream>

#include "genrl/errors.hpp"
#include "json.hpp"

namespace genrl::harness {

using json = nlohmann::ordered_json;

const std::vector<std::string>& metric_names(EnvKind kind) {
  static const std::vector<std::string> maze = {"bugs_type1", "bugs_type2", "cumulative_reward", "train_seconds",
                                                "test_seconds"};
  static const std::vector<std::string> pac = {"gate_1", "gate_2", "gate_3", "gate_4",
                                               "cumulative_reward", "train_seconds", "test_seconds"};
  static const std::vector<std::string> jssp = {"makespan", "cumulative_reward", "train_seconds", "test_seconds"};
  switch (kind) {
    case EnvKind::kBlockmaze: return maze;
    case EnvKind::kPacGrid: return pac;
    case EnvKind::kJssp: return jssp;
  }
  return jssp;
}

std::optional<double> RunRecord::metric(const std::string& name) const {
  if (name == "train_seconds") return train_seconds;
  if (name == "test_seconds") return test_seconds;
  if (auto it = metrics.find(name); it != metrics.end()) return it->second;
  return std::nullopt;
}

std::string to_json(const RunRecord& r, bool include_timings) {
  json j;
  j["run_id"] = r.run_id;
  j["fingerprint"] = r.fingerprint;
  j["env"] = r.env;
  j["agent"] = r.agent;
  j["budget"] = r.budget;
  j["seed"] = r.seed;
  j["budget_kind"] = r.budget_kind;
  j["budget_amount"] = r.budget_amount;
  // A seconds budget is consumed wall-clock time.
  if (include_timings || r.budget_kind != "seconds") j["budget_consumed"] = r.budget_consumed;
  j["updates"] = r.updates;
  j["finetune_steps"] = r.finetune_steps;
  j["finetune_episodes"] = r.finetune_episodes;
  j["metrics"] = json::object();
  for (const auto& [k, v] : r.metrics) j["metrics"][k] = v;
  j["episode_returns"] = r.episode_returns;
  if (include_timings) {
    j["train_seconds"] = r.train_seconds;
    j["test_seconds"] = r.test_seconds;
  }
  j["status"] = r.status;
  if (!r.error.empty()) j["error"] = r.error;
  j["config"] = r.config;
  return j.dump();
}

RunRecord record_from_json(const std::string& line) {
  RunRecord r;
  try {
    const json j = json::parse(line);
    r.run_id = j.at("run_id").get<std::string>();
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.env = j.at("env").get<std::string>();
    r.agent = j.at("agent").get<std::string>();
    r.budget = j.at("budget").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.budget_kind = j.at("budget_kind").get<std::string>();
    r.budget_amount = j.at("budget_amount").get<double>();
    r.budget_consumed = j.value("budget_consumed", 0.0);
    r.updates = j.at("updates").get<std::uint64_t>();
    r.finetune_steps = j.at("finetune_steps").get<std::uint64_t>();
    r.finetune_episodes = j.at("finetune_episodes").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("metrics").items()) r.metrics[k] = v.get<double>();
    r.episode_returns = j.at("episode_returns").get<std::vector<double>>();
    r.train_seconds = j.value("train_seconds", 0.0);
    r.test_seconds = j.value("test_seconds", 0.0);
    r.status = j.at("status").get<std::string>();
    r.error = j.value("error", std::string());
    r.config = j.at("config").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("run record: ") + e.what());
  }
  return r;
}

void append_record(const std::filesystem::path& path, const RunRecord& r) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw StateError("cannot open " + path.string());
  out << to_json(r) << '\n';
}

std::vector<RunRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<RunRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(line));
  }
  return out;
}

}  // namespace genrl::harness
