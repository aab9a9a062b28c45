#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genrl/harness/config.hpp"

namespace genrl::harness {

/// Metric names reported for an environment, in table order.
const std::vector<std::string>& metric_names(EnvKind kind);

/// Outcome of one (agent, budget, seed) grid point.
struct RunRecord {
  std::string run_id;
  std::string fingerprint;
  std::string config;  // canonical key=value text the fingerprint is taken over
  std::string env;
  std::string agent;
  std::string budget;
  std::uint64_t seed = 0;
  std::string budget_kind;
  double budget_amount = 0.0;
  double budget_consumed = 0.0;
  std::uint64_t updates = 0;
  std::uint64_t finetune_steps = 0;
  std::uint64_t finetune_episodes = 0;
  std::vector<double> episode_returns;  // evaluation episodes
  std::map<std::string, double> metrics;  // environment metrics without timings
  double train_seconds = 0.0;
  double test_seconds = 0.0;
  std::string status = "ok";
  std::string error;

  /// Metric value by name; train_seconds and test_seconds included.
  std::optional<double> metric(const std::string& name) const;
  bool fingerprint_matches() const { return fingerprint_of(config) == fingerprint; }
};

/// One JSON object. Timings are omitted when include_timings is false, which
/// gives a machine-independent form for reproducibility checks.
std::string to_json(const RunRecord& r, bool include_timings = true);
RunRecord record_from_json(const std::string& line);

void append_record(const std::filesystem::path& path, const RunRecord& r);
/// Reads a JSONL file of records. Throws ParseError on malformed lines.
std::vector<RunRecord> read_records(const std::filesystem::path& path);

}  // namespace genrl::harness
