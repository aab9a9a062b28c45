#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "genrl/harness/record.hpp"
#include "genrl/harness/stats.hpp"

namespace genrl::harness {

struct ReportRow {
  std::string env;
  std::string agent;
  std::string budget;
  std::string metric;
  std::size_t runs = 0;
  Aggregate stats;
};

/// Rows ordered by environment, agent, budget and metric, using the known
/// tag orders first and then lexicographic order.
struct ReportTable {
  std::vector<ReportRow> rows;
};

/// Aggregates one metric over runs. Throws ContractError when a run lacks it.
Aggregate aggregate(std::span<const RunRecord> runs, const std::string& metric);

/// Groups successful records by (env, agent, budget) and aggregates every
/// metric present in all runs of a group.
ReportTable build_report(std::span<const RunRecord> records);

/// Columns agent,budget,metric,mean,std,median for one environment.
std::string report_csv(const ReportTable& table, const std::string& env);
/// Columns metric,budget,agent_a,agent_b,cles for every ordered agent pair
/// (a listed before b) of one environment.
std::string cles_csv(std::span<const RunRecord> records, const std::string& env);
/// Aligned table with mean/std/median rows per agent, one block per budget.
std::string report_text(const ReportTable& table, const std::string& env);

/// Writes report_<env>.csv, cles_<env>.csv and report_<env>.txt per
/// environment present in records. Returns the written paths.
std::vector<std::filesystem::path> write_report(std::span<const RunRecord> records, const std::filesystem::path& dir);

}  // namespace genrl::harness
