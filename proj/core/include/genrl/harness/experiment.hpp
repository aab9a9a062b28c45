#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "genrl/harness/config.hpp"
#include "genrl/harness/record.hpp"
#include "genrl/harness/report.hpp"

namespace genrl::harness {

enum class Stage { kPretrain, kFinetune, kEvaluate };

struct ExperimentOptions {
  Stage stage = Stage::kEvaluate;
  /// Run directory. Empty keeps everything in memory.
  std::filesystem::path out_dir;
  /// Subsets of the configured agent and budget lists; empty means all.
  std::vector<std::string> agents;
  std::vector<std::string> budgets;
  /// Load pretrained and fine-tuned checkpoints found in out_dir instead of
  /// recomputing them.
  bool reuse_checkpoints = false;
};

struct ExperimentResult {
  std::vector<RunRecord> records;  // agent, budget, seed order
  ReportTable table;
  std::size_t failures = 0;
};

/// For every agent and seed: build the agent, pre-train it once, then for
/// every budget fine-tune a copy for that budget (zero_shot skips training)
/// and evaluate it. A failing grid point yields a record with status
/// "failed"; the others still run.
///
/// Run directory layout: config.txt, fingerprint, runs.jsonl,
/// checkpoints/<agent>/seed<k>/{pretrained,<budget>}.ckpt,
/// logs/<agent>/<budget>/seed<k>/actor_<i>.jsonl (with run.log_segments) and
/// the report files.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentOptions& options = {});

/// Seed of run k.
std::uint64_t run_seed(const ExperimentConfig& cfg, std::size_t k);

}  // namespace genrl::harness
