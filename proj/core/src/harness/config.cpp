#include "genrl/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "genrl/errors.hpp"

namespace genrl::harness {

namespace {

const std::map<std::string, std::string>& schema() {
  static const std::map<std::string, std::string> defaults = {
      {"env.name", "jssp"},
      {"env.maze", "default"},
      {"env.bug_count", "25"},
      {"env.type1_fraction", "0.5"},
      {"env.bug_seed", "0"},
      {"env.retrigger_type1", "true"},
      {"env.maze_step_cap", "400"},
      {"env.variant_density", "0.25"},
      {"env.pac_step_cap", "500"},
      {"env.ghosts", "true"},
      {"env.gate_rearm", "evaluation"},
      {"env.jobs", "6"},
      {"env.machines", "6"},
      {"env.time_low", "1"},
      {"env.time_high", "99"},
      {"agent.list", "IMPALA-V_TRACE,IMPALA-PPO,MGDT-MAENT,MGDT-DQN,MGDT-PPO"},
      {"agent.hidden", "64,64"},
      {"agent.actors", "4"},
      {"agent.synchronous", "false"},
      {"agent.segment_length", "20"},
      {"agent.queue_capacity", "64"},
      {"agent.batch", "32"},
      {"agent.gamma", "0.99"},
      {"agent.impala_lr", "0.00048"},
      {"agent.rho_bar", "1"},
      {"agent.c_bar", "1"},
      {"agent.baseline_cost", "0.5"},
      {"agent.entropy_cost", "0.0006"},
      {"agent.ppo_clip", "0.2"},
      {"agent.ppo_epochs", "auto"},
      {"agent.gae_lambda", "0.95"},
      {"agent.ppo_entropy", "0.01"},
      {"agent.mgdt_lr", "0.0001"},
      {"agent.mgdt_weight_decay", "0.0005"},
      {"agent.embed", "64"},
      {"agent.heads", "4"},
      {"agent.layers", "2"},
      {"agent.context", "4"},
      {"agent.return_bins", "64"},
      {"agent.patches", "9"},
      {"agent.beta", "auto"},
      {"agent.dual_lr", "0.001"},
      {"agent.buffer", "10000"},
      {"agent.updates_between_rollouts", "300"},
      {"agent.return_low", "auto"},
      {"agent.return_high", "auto"},
      {"agent.target_return", "auto"},
      {"agent.eps_start", "0.99"},
      {"agent.eps_end", "0.05"},
      {"agent.eps_decay", "10000"},
      {"agent.target_sync", "500"},
      {"agent.dqn_warmup", "256"},
      {"agent.replay", "10000"},
      {"budget.kind", "auto"},
      {"budget.specialist", "auto"},
      {"budget.list", "zero_shot,one_pct,two_pct"},
      {"budget.custom_fraction", "0.05"},
      {"eval.scale", "1"},
      {"eval.blockmaze_steps", "300000"},
      {"eval.pacgrid_episodes", "1000"},
      {"eval.jssp_instances", "100"},
      {"eval.seed", "12345"},
      {"eval.temperature", "1"},
      {"eval.epsilon", "0.05"},
      {"pretrain.enabled", "true"},
      {"pretrain.steps", "20000"},
      {"pretrain.demos", "64"},
      {"pretrain.updates", "400"},
      {"pretrain.variants", "8"},
      {"run.seeds", "5"},
      {"run.seed", "0"},
      {"run.threads", "1"},
      {"run.log_segments", "false"},
  };
  return defaults;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_real(const ConfigMap& m, const std::string& key) {
  const std::string& v = m.get(key);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (v.empty() || v[0] == '-') throw std::invalid_argument(v);
    const unsigned long long u = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a non-negative integer, got '" + v + "'");
  }
}

std::uint64_t to_uint(const ConfigMap& m, const std::string& key) { return parse_uint(key, m.get(key)); }

std::int64_t to_int(const ConfigMap& m, const std::string& key) {
  const std::string& v = m.get(key);
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  }
}

bool to_bool(const ConfigMap& m, const std::string& key) {
  const std::string& v = m.get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: " + key + " expects true or false, got '" + v + "'");
}

std::optional<double> to_auto_real(const ConfigMap& m, const std::string& key) {
  if (m.get(key) == "auto") return std::nullopt;
  return to_real(m, key);
}

std::size_t to_positive(const ConfigMap& m, const std::string& key) {
  const auto u = to_uint(m, key);
  if (u == 0) throw ConfigError("config: " + key + " must be positive");
  return static_cast<std::size_t>(u);
}

}  // namespace

ConfigMap::ConfigMap() : values_(schema()) {}

ConfigMap ConfigMap::parse(std::string_view text) {
  ConfigMap m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    m.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
  return m;
}

ConfigMap ConfigMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config: unknown key '" + key + "'");
  if (value.find_first_of("\n\r") != std::string::npos) throw ConfigError("config: newline in value of " + key);
  it->second = value;
}

const std::string& ConfigMap::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config: unknown key '" + key + "'");
  return it->second;
}

std::string ConfigMap::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string ConfigMap::fingerprint() const { return fingerprint_of(canonical()); }

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fingerprint_of(std::string_view canonical_text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_text)));
  return buf;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    std::string item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

const char* to_string(EnvKind k) noexcept {
  switch (k) {
    case EnvKind::kBlockmaze: return "blockmaze";
    case EnvKind::kPacGrid: return "pacgrid";
    case EnvKind::kJssp: return "jssp";
  }
  return "?";
}

EnvKind parse_env_kind(std::string_view s) {
  if (s == "blockmaze") return EnvKind::kBlockmaze;
  if (s == "pacgrid") return EnvKind::kPacGrid;
  if (s == "jssp") return EnvKind::kJssp;
  throw ConfigError("config: unknown environment '" + std::string(s) + "'");
}

const std::vector<std::string>& known_agents() {
  static const std::vector<std::string> tags = {kImpalaVTrace, kImpalaPpo, kMgdtMaent, kMgdtDqn, kMgdtPpo};
  return tags;
}

const std::vector<std::string>& known_budgets() {
  static const std::vector<std::string> tags = {"zero_shot", "one_pct", "two_pct", "custom"};
  return tags;
}

double BudgetConfig::fraction(const std::string& tag) const {
  if (tag == "zero_shot") return 0.0;
  if (tag == "one_pct") return 0.01;
  if (tag == "two_pct") return 0.02;
  if (tag == "custom") return custom_fraction;
  throw ConfigError("config: unknown budget tag '" + tag + "'");
}

double BudgetConfig::amount(const std::string& tag) const {
  const double a = fraction(tag) * specialist;
  return kind == runtime::BudgetKind::kSeconds ? a : std::round(a);
}

std::size_t EvalConfig::scaled_blockmaze_steps() const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(blockmaze_steps) * scale)));
}

std::size_t EvalConfig::scaled_pacgrid_episodes() const {
  return std::max<std::size_t>(1,
                               static_cast<std::size_t>(std::llround(static_cast<double>(pacgrid_episodes) * scale)));
}

ExperimentConfig ExperimentConfig::from(const ConfigMap& m) {
  ExperimentConfig c;
  c.source = m;

  auto& e = c.env;
  e.kind = parse_env_kind(m.get("env.name"));
  e.maze = m.get("env.maze");
  e.bug_count = static_cast<int>(to_uint(m, "env.bug_count"));
  e.type1_fraction = to_real(m, "env.type1_fraction");
  e.bug_seed = to_uint(m, "env.bug_seed");
  e.retrigger_type1 = to_bool(m, "env.retrigger_type1");
  e.maze_step_cap = static_cast<int>(to_positive(m, "env.maze_step_cap"));
  e.variant_density = to_real(m, "env.variant_density");
  e.pac_step_cap = static_cast<int>(to_uint(m, "env.pac_step_cap"));
  e.ghosts = to_bool(m, "env.ghosts");
  const std::string& rearm = m.get("env.gate_rearm");
  if (rearm != "evaluation" && rearm != "episode") {
    throw ConfigError("config: env.gate_rearm expects evaluation or episode");
  }
  e.gate_per_episode = rearm == "episode";
  e.jobs = static_cast<int>(to_positive(m, "env.jobs"));
  e.machines = static_cast<int>(to_positive(m, "env.machines"));
  e.time_low = to_int(m, "env.time_low");
  e.time_high = to_int(m, "env.time_high");
  if (e.type1_fraction < 0.0 || e.type1_fraction > 1.0) throw ConfigError("config: env.type1_fraction outside [0,1]");
  if (e.time_low < 1 || e.time_high < e.time_low) throw ConfigError("config: invalid processing-time range");
  if (e.variant_density < 0.0 || e.variant_density >= 1.0) throw ConfigError("config: env.variant_density outside [0,1)");

  auto& a = c.agent;
  a.list = split_list(m.get("agent.list"));
  if (a.list.empty()) throw ConfigError("config: agent.list is empty");
  for (const auto& tag : a.list) {
    if (std::find(known_agents().begin(), known_agents().end(), tag) == known_agents().end()) {
      throw ConfigError("config: unknown agent '" + tag + "'");
    }
  }
  a.hidden.clear();
  for (const auto& w : split_list(m.get("agent.hidden"))) {
    const auto width = parse_uint("agent.hidden", w);
    if (width == 0) throw ConfigError("config: agent.hidden widths must be positive");
    a.hidden.push_back(static_cast<std::size_t>(width));
  }
  a.actors = to_positive(m, "agent.actors");
  a.synchronous = to_bool(m, "agent.synchronous");
  if (a.synchronous) a.actors = 1;
  a.segment_length = to_positive(m, "agent.segment_length");
  a.queue_capacity = to_positive(m, "agent.queue_capacity");
  a.batch = to_positive(m, "agent.batch");
  a.gamma = to_real(m, "agent.gamma");
  a.impala_lr = to_real(m, "agent.impala_lr");
  a.rho_bar = to_real(m, "agent.rho_bar");
  a.c_bar = to_real(m, "agent.c_bar");
  a.baseline_cost = to_real(m, "agent.baseline_cost");
  a.entropy_cost = to_real(m, "agent.entropy_cost");
  a.ppo_clip = to_real(m, "agent.ppo_clip");
  a.ppo_epochs = m.get("agent.ppo_epochs") == "auto" ? (e.kind == EnvKind::kPacGrid ? 3 : 15)
                                                      : to_positive(m, "agent.ppo_epochs");
  a.gae_lambda = to_real(m, "agent.gae_lambda");
  a.ppo_entropy = to_real(m, "agent.ppo_entropy");
  a.mgdt_lr = to_real(m, "agent.mgdt_lr");
  a.mgdt_weight_decay = to_real(m, "agent.mgdt_weight_decay");
  a.embed = to_positive(m, "agent.embed");
  a.heads = to_positive(m, "agent.heads");
  a.layers = to_positive(m, "agent.layers");
  a.context = to_positive(m, "agent.context");
  a.return_bins = to_positive(m, "agent.return_bins");
  a.patches = to_positive(m, "agent.patches");
  const std::size_t actions = e.kind == EnvKind::kBlockmaze ? 4 : e.kind == EnvKind::kPacGrid ? 5
                                                                                             : static_cast<std::size_t>(e.jobs);
  a.beta = m.get("agent.beta") == "auto" ? 0.5 * std::log(static_cast<double>(actions)) : to_real(m, "agent.beta");
  a.dual_lr = to_real(m, "agent.dual_lr");
  a.buffer = to_positive(m, "agent.buffer");
  a.updates_between_rollouts = to_positive(m, "agent.updates_between_rollouts");
  a.return_low = to_auto_real(m, "agent.return_low");
  a.return_high = to_auto_real(m, "agent.return_high");
  a.target_return = to_auto_real(m, "agent.target_return");
  a.eps_start = to_real(m, "agent.eps_start");
  a.eps_end = to_real(m, "agent.eps_end");
  a.eps_decay = to_positive(m, "agent.eps_decay");
  a.target_sync = to_positive(m, "agent.target_sync");
  a.dqn_warmup = to_uint(m, "agent.dqn_warmup");
  a.replay = to_positive(m, "agent.replay");
  if (a.gamma < 0.0 || a.gamma > 1.0) throw ConfigError("config: agent.gamma outside [0,1]");
  if (a.embed % a.heads != 0) throw ConfigError("config: agent.embed must be divisible by agent.heads");

  auto& b = c.budget;
  const std::string& kind = m.get("budget.kind");
  if (kind == "auto") {
    b.kind = e.kind == EnvKind::kBlockmaze ? runtime::BudgetKind::kSeconds
             : e.kind == EnvKind::kPacGrid ? runtime::BudgetKind::kEpisodes
                                           : runtime::BudgetKind::kSteps;
  } else {
    b.kind = runtime::parse_budget_kind(kind);
  }
  if (m.get("budget.specialist") == "auto") {
    switch (e.kind) {
      case EnvKind::kBlockmaze: b.specialist = 43200; break;
      case EnvKind::kPacGrid: b.specialist = 1000; break;
      case EnvKind::kJssp: b.specialist = e.jobs * e.machines >= 600 ? 6000000 : 36000; break;
    }
  } else {
    b.specialist = to_real(m, "budget.specialist");
    if (b.specialist < 0) throw ConfigError("config: budget.specialist must be non-negative");
  }
  b.list = split_list(m.get("budget.list"));
  if (b.list.empty()) throw ConfigError("config: budget.list is empty");
  b.custom_fraction = to_real(m, "budget.custom_fraction");
  if (b.custom_fraction < 0.0 || b.custom_fraction > 1.0) throw ConfigError("config: budget.custom_fraction outside [0,1]");
  for (const auto& tag : b.list) (void)b.fraction(tag);

  auto& v = c.eval;
  v.scale = to_real(m, "eval.scale");
  if (v.scale <= 0.0) throw ConfigError("config: eval.scale must be positive");
  v.blockmaze_steps = to_positive(m, "eval.blockmaze_steps");
  v.pacgrid_episodes = to_positive(m, "eval.pacgrid_episodes");
  v.jssp_instances = to_positive(m, "eval.jssp_instances");
  v.seed = to_uint(m, "eval.seed");
  v.temperature = to_real(m, "eval.temperature");
  v.epsilon = to_real(m, "eval.epsilon");
  if (v.temperature <= 0.0) throw ConfigError("config: eval.temperature must be positive");
  if (v.epsilon < 0.0 || v.epsilon > 1.0) throw ConfigError("config: eval.epsilon outside [0,1]");

  auto& p = c.pretrain;
  p.enabled = to_bool(m, "pretrain.enabled");
  p.steps = to_uint(m, "pretrain.steps");
  p.demos = to_uint(m, "pretrain.demos");
  p.updates = to_uint(m, "pretrain.updates");
  p.variants = to_positive(m, "pretrain.variants");

  auto& r = c.run;
  r.seeds = to_positive(m, "run.seeds");
  r.seed = to_uint(m, "run.seed");
  r.threads = to_positive(m, "run.threads");
  r.log_segments = to_bool(m, "run.log_segments");
  return c;
}

}  // namespace genrl::harness
