#include "genrl/harness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include "genrl/errors.hpp"

namespace genrl::harness {

namespace {

std::size_t rank_in(const std::vector<std::string>& order, const std::string& s) {
  const auto it = std::find(order.begin(), order.end(), s);
  return static_cast<std::size_t>(it - order.begin());
}

/// Known tags first in their canonical order, then the rest sorted.
std::vector<std::string> ordered(std::set<std::string> values, const std::vector<std::string>& known) {
  std::vector<std::string> out(values.begin(), values.end());
  std::stable_sort(out.begin(), out.end(),
                   [&](const std::string& a, const std::string& b) { return rank_in(known, a) < rank_in(known, b); });
  return out;
}

std::vector<std::string> metrics_for(const std::string& env) {
  try {
    return metric_names(parse_env_kind(env));
  } catch (const ConfigError&) {
    return {};
  }
}

std::string num(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string csv_num(double v) { return num(v, "%.12g"); }

struct Group {
  std::vector<std::string> agents;
  std::vector<std::string> budgets;
};

Group groups_of(std::span<const RunRecord> records, const std::string& env) {
  std::set<std::string> agents;
  std::set<std::string> budgets;
  for (const auto& r : records) {
    if (r.env != env || r.status != "ok") continue;
    agents.insert(r.agent);
    budgets.insert(r.budget);
  }
  return {ordered(agents, known_agents()), ordered(budgets, known_budgets())};
}

std::vector<RunRecord> select(std::span<const RunRecord> records, const std::string& env, const std::string& agent,
                              const std::string& budget) {
  std::vector<RunRecord> out;
  for (const auto& r : records) {
    if (r.env == env && r.agent == agent && r.budget == budget && r.status == "ok") out.push_back(r);
  }
  return out;
}

std::vector<double> values_of(std::span<const RunRecord> runs, const std::string& metric) {
  std::vector<double> v;
  for (const auto& r : runs) {
    const auto m = r.metric(metric);
    if (!m) throw ContractError("metric '" + metric + "' absent from run " + r.run_id);
    v.push_back(*m);
  }
  return v;
}

bool all_have(std::span<const RunRecord> runs, const std::string& metric) {
  return std::all_of(runs.begin(), runs.end(), [&](const RunRecord& r) {
    // Timings are always present; report them only for evaluated runs.
    return r.metrics.count(metric) != 0 || ((metric == "train_seconds" || metric == "test_seconds") && !r.metrics.empty());
  });
}

}  // namespace

Aggregate aggregate(std::span<const RunRecord> runs, const std::string& metric) {
  if (runs.empty()) throw ContractError("aggregate: no runs");
  const auto v = values_of(runs, metric);
  return aggregate(std::span<const double>(v));
}

ReportTable build_report(std::span<const RunRecord> records) {
  std::set<std::string> envs;
  for (const auto& r : records) {
    if (r.status == "ok") envs.insert(r.env);
  }
  ReportTable t;
  for (const auto& env : envs) {
    const Group g = groups_of(records, env);
    for (const auto& agent : g.agents) {
      for (const auto& budget : g.budgets) {
        const auto runs = select(records, env, agent, budget);
        if (runs.empty()) continue;
        for (const auto& metric : metrics_for(env)) {
          if (!all_have(runs, metric)) continue;
          t.rows.push_back({env, agent, budget, metric, runs.size(), aggregate(runs, metric)});
        }
      }
    }
  }
  return t;
}

std::string report_csv(const ReportTable& table, const std::string& env) {
  std::string out = "agent,budget,metric,mean,std,median\n";
  for (const auto& r : table.rows) {
    if (r.env != env) continue;
    out += r.agent + "," + r.budget + "," + r.metric + "," + csv_num(r.stats.mean) + "," + csv_num(r.stats.std) + "," +
           csv_num(r.stats.median) + "\n";
  }
  return out;
}

std::string cles_csv(std::span<const RunRecord> records, const std::string& env) {
  std::string out = "metric,budget,agent_a,agent_b,cles\n";
  const Group g = groups_of(records, env);
  for (const auto& metric : metrics_for(env)) {
    for (const auto& budget : g.budgets) {
      for (std::size_t i = 0; i < g.agents.size(); ++i) {
        const auto a = select(records, env, g.agents[i], budget);
        if (a.empty() || !all_have(a, metric)) continue;
        for (std::size_t j = i + 1; j < g.agents.size(); ++j) {
          const auto b = select(records, env, g.agents[j], budget);
          if (b.empty() || !all_have(b, metric)) continue;
          const auto va = values_of(a, metric);
          const auto vb = values_of(b, metric);
          out += metric + "," + budget + "," + g.agents[i] + "," + g.agents[j] + "," + csv_num(cles(va, vb)) + "\n";
        }
      }
    }
  }
  return out;
}

std::string report_text(const ReportTable& table, const std::string& env) {
  std::vector<std::string> agents;
  std::vector<std::string> budgets;
  std::vector<std::string> metrics;
  std::map<std::tuple<std::string, std::string, std::string>, Aggregate> cells;
  for (const auto& r : table.rows) {
    if (r.env != env) continue;
    if (std::find(agents.begin(), agents.end(), r.agent) == agents.end()) agents.push_back(r.agent);
    if (std::find(budgets.begin(), budgets.end(), r.budget) == budgets.end()) budgets.push_back(r.budget);
    if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end()) metrics.push_back(r.metric);
    cells[{r.agent, r.budget, r.metric}] = r.stats;
  }
  const auto canon = metrics_for(env);
  std::stable_sort(metrics.begin(), metrics.end(),
                   [&](const std::string& a, const std::string& b) { return rank_in(canon, a) < rank_in(canon, b); });
  std::size_t agent_w = 5;
  for (const auto& a : agents) agent_w = std::max(agent_w, a.size());
  std::vector<std::size_t> col_w;
  for (const auto& m : metrics) col_w.push_back(std::max<std::size_t>(m.size(), 9));
  const auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  const auto lpad = [](const std::string& s, std::size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; };
  std::string out;
  for (const auto& budget : budgets) {
    out += env + " / " + budget + "\n";
    std::string header = pad("agent", agent_w) + "  " + pad("stat", 6);
    for (std::size_t k = 0; k < metrics.size(); ++k) header += "  " + lpad(metrics[k], col_w[k]);
    out += header + "\n" + std::string(header.size(), '-') + "\n";
    for (const auto& agent : agents) {
      const char* stats[] = {"mean", "std", "median"};
      for (int s = 0; s < 3; ++s) {
        std::string line = pad(s == 0 ? agent : "", agent_w) + "  " + pad(stats[s], 6);
        for (std::size_t k = 0; k < metrics.size(); ++k) {
          const auto it = cells.find({agent, budget, metrics[k]});
          std::string cell = "NA";
          if (it != cells.end()) {
            const double v = s == 0 ? it->second.mean : s == 1 ? it->second.std : it->second.median;
            cell = num(v, "%.2e");
          }
          line += "  " + lpad(cell, col_w[k]);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
      }
    }
    out += "\n";
  }
  return out;
}

std::vector<std::filesystem::path> write_report(std::span<const RunRecord> records, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const ReportTable table = build_report(records);
  std::set<std::string> envs;
  for (const auto& r : records) {
    if (r.status == "ok") envs.insert(r.env);
  }
  std::vector<std::filesystem::path> written;
  const auto emit = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw StateError("cannot write " + p.string());
    out << text;
    written.push_back(p);
  };
  for (const auto& env : envs) {
    emit(dir / ("report_" + env + ".csv"), report_csv(table, env));
    emit(dir / ("cles_" + env + ".csv"), cles_csv(records, env));
    emit(dir / ("report_" + env + ".txt"), report_text(table, env));
  }
  return written;
}

}  // namespace genrl::harness
