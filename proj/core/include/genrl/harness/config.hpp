#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "genrl/runtime/budget.hpp"

namespace genrl::harness {

/// Flat key=value configuration over a fixed schema. Every key has a default;
/// setting a key outside the schema throws ConfigError.
///
/// Text form: one `key = value` per line, '#' starts a comment, blank lines
/// are ignored. Keys carry a section prefix (env., agent., budget., eval.,
/// pretrain., run.).
class ConfigMap {
 public:
  ConfigMap();

  static ConfigMap parse(std::string_view text);
  static ConfigMap load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  /// Sorted `key=value` lines, one per schema key.
  std::string canonical() const;
  /// 64-bit FNV-1a of canonical(), as 16 hex digits.
  std::string fingerprint() const;

  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// FNV-1a over the bytes of text.
std::uint64_t fnv1a64(std::string_view text);
/// fingerprint() of the configuration stored as canonical text.
std::string fingerprint_of(std::string_view canonical_text);

std::vector<std::string> split_list(std::string_view s);

enum class EnvKind { kBlockmaze, kPacGrid, kJssp };

const char* to_string(EnvKind k) noexcept;
EnvKind parse_env_kind(std::string_view s);

/// Agent configuration names.
inline constexpr const char* kImpalaVTrace = "IMPALA-V_TRACE";
inline constexpr const char* kImpalaPpo = "IMPALA-PPO";
inline constexpr const char* kMgdtMaent = "MGDT-MAENT";
inline constexpr const char* kMgdtDqn = "MGDT-DQN";
inline constexpr const char* kMgdtPpo = "MGDT-PPO";

const std::vector<std::string>& known_agents();
const std::vector<std::string>& known_budgets();

struct EnvConfig {
  EnvKind kind = EnvKind::kJssp;
  // blockmaze
  std::string maze = "default";  // default | small | path to a maze file
  int bug_count = 25;
  double type1_fraction = 0.5;
  std::uint64_t bug_seed = 0;
  bool retrigger_type1 = true;
  int maze_step_cap = 400;
  double variant_density = 0.25;
  // pacgrid
  int pac_step_cap = 500;
  bool ghosts = true;
  bool gate_per_episode = false;
  // jssp
  int jobs = 6;
  int machines = 6;
  std::int64_t time_low = 1;
  std::int64_t time_high = 99;
};

struct AgentConfig {
  std::vector<std::string> list;
  std::vector<std::size_t> hidden{64, 64};
  std::size_t actors = 4;
  bool synchronous = false;
  std::size_t segment_length = 20;
  std::size_t queue_capacity = 64;
  std::size_t batch = 32;
  double gamma = 0.99;
  // IMPALA
  double impala_lr = 0.00048;
  double rho_bar = 1.0;
  double c_bar = 1.0;
  double baseline_cost = 0.5;
  double entropy_cost = 0.0006;
  // PPO
  double ppo_clip = 0.2;
  std::size_t ppo_epochs = 15;
  double gae_lambda = 0.95;
  double ppo_entropy = 0.01;
  // MGDT
  double mgdt_lr = 1e-4;
  double mgdt_weight_decay = 5e-4;
  std::size_t embed = 64;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t context = 4;
  std::size_t return_bins = 64;
  std::size_t patches = 9;
  double beta = 0.0;
  double dual_lr = 1e-3;
  std::size_t buffer = 10000;
  std::size_t updates_between_rollouts = 300;
  std::optional<double> return_low;
  std::optional<double> return_high;
  std::optional<double> target_return;
  // DQN
  double eps_start = 0.99;
  double eps_end = 0.05;
  std::size_t eps_decay = 10000;
  std::size_t target_sync = 500;
  std::size_t dqn_warmup = 256;
  std::size_t replay = 10000;
};

struct BudgetConfig {
  runtime::BudgetKind kind = runtime::BudgetKind::kSteps;
  double specialist = 36000;
  std::vector<std::string> list;
  double custom_fraction = 0.05;

  /// Fraction of the specialist budget for a budget tag.
  double fraction(const std::string& tag) const;
  /// Budget amount for a tag; steps and episodes are rounded to integers.
  double amount(const std::string& tag) const;
};

struct EvalConfig {
  double scale = 1.0;
  std::size_t blockmaze_steps = 300000;
  std::size_t pacgrid_episodes = 1000;
  std::size_t jssp_instances = 100;
  std::uint64_t seed = 12345;
  double temperature = 1.0;
  double epsilon = 0.05;

  std::size_t scaled_blockmaze_steps() const;
  std::size_t scaled_pacgrid_episodes() const;
};

struct PretrainConfig {
  bool enabled = true;
  std::size_t steps = 20000;
  std::size_t demos = 64;
  std::size_t updates = 400;
  std::size_t variants = 8;
};

struct RunConfig {
  std::size_t seeds = 5;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool log_segments = false;
};

/// Typed view of a ConfigMap with every `auto` value resolved.
struct ExperimentConfig {
  EnvConfig env;
  AgentConfig agent;
  BudgetConfig budget;
  EvalConfig eval;
  PretrainConfig pretrain;
  RunConfig run;
  ConfigMap source;

  static ExperimentConfig from(const ConfigMap& map);
};

}  // namespace genrl::harness
