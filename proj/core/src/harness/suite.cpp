#include "genrl/harness/suite.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include "genrl/env/jssp.hpp"
#include "genrl/errors.hpp"

namespace genrl::harness {

namespace {

constexpr std::uint64_t kFamilySalt = 0x66616d696c79ull;

/// Cycles over prototype environments, picking one per reset seed.
class FamilyEnv final : public Environment {
 public:
  explicit FamilyEnv(std::vector<std::shared_ptr<const Environment>> protos)
      : protos_(std::move(protos)), current_(protos_.front()->clone()) {}

  FamilyEnv(const FamilyEnv& other) : protos_(other.protos_), current_(other.current_->clone()) {}

  std::size_t action_count() const override { return current_->action_count(); }
  ObservationShape observation_shape() const override { return current_->observation_shape(); }
  Observation reset(std::uint64_t seed) override {
    const std::uint64_t s = mix64(seed ^ kFamilySalt);
    current_ = protos_[s % protos_.size()]->clone();
    return current_->reset(s);
  }
  StepResult step(int action) override { return current_->step(action); }
  Observation observe() const override { return current_->observe(); }
  bool done() const override { return current_->done(); }
  ActionMask action_mask() const override { return current_->action_mask(); }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<FamilyEnv>(*this); }

  const Environment& current() const { return *current_; }

 private:
  std::vector<std::shared_ptr<const Environment>> protos_;
  std::unique_ptr<Environment> current_;
};

const Environment& unwrap(const Environment& e) {
  if (const auto* f = dynamic_cast<const FamilyEnv*>(&e)) return f->current();
  return e;
}

/// BFS first move from `from` to the nearest cell accepted by `is_target`,
/// through cells accepted by `passable`. Returns -1 when nothing is reachable.
template <class Passable, class Target>
int first_move_bfs(int rows, int cols, env::Cell from, Passable passable, Target is_target) {
  const auto idx = [cols](env::Cell c) { return static_cast<std::size_t>(c.row * cols + c.col); };
  std::vector<int> first(static_cast<std::size_t>(rows * cols), -2);
  std::queue<env::Cell> frontier;
  first[idx(from)] = -1;
  frontier.push(from);
  while (!frontier.empty()) {
    const env::Cell c = frontier.front();
    frontier.pop();
    if (c != from && is_target(c)) return first[idx(c)];
    for (env::Move m : env::kCardinalMoves) {
      const env::Cell n = env::moved(c, m);
      if (n.row < 0 || n.col < 0 || n.row >= rows || n.col >= cols) continue;
      if (first[idx(n)] != -2 || !passable(n)) continue;
      first[idx(n)] = c == from ? static_cast<int>(m) : first[idx(c)];
      frontier.push(n);
    }
  }
  return -1;
}

int maze_distance(const env::MazeSpec& spec) {
  const auto idx = [&](env::Cell c) { return static_cast<std::size_t>(c.row * spec.cols + c.col); };
  std::vector<int> dist(spec.tiles.size(), -1);
  std::queue<env::Cell> frontier;
  dist[idx(spec.start)] = 0;
  frontier.push(spec.start);
  while (!frontier.empty()) {
    const env::Cell c = frontier.front();
    frontier.pop();
    if (c == spec.goal) return dist[idx(c)];
    for (env::Move m : env::kCardinalMoves) {
      const env::Cell n = env::moved(c, m);
      if (!spec.in_bounds(n) || spec.tile(n) == env::MazeTile::kBlock || dist[idx(n)] >= 0) continue;
      dist[idx(n)] = dist[idx(c)] + 1;
      frontier.push(n);
    }
  }
  return -1;
}

env::PacGridSpec mirrored(const env::PacGridSpec& spec) {
  std::istringstream in(env::format_pacgrid(spec));
  std::string row;
  std::string text;
  while (std::getline(in, row)) {
    std::reverse(row.begin(), row.end());
    text += row + "\n";
  }
  env::PacGridSpec out = env::parse_pacgrid(text);
  out.ghost_policy_seed = spec.ghost_policy_seed;
  return out;
}

env::MazeSpec load_maze(const EnvConfig& cfg) {
  env::MazeSpec layout;
  if (cfg.maze == "default") {
    layout = env::default_maze();
  } else if (cfg.maze == "small") {
    layout = env::small_maze();
  } else {
    std::ifstream in(cfg.maze);
    if (!in) throw ConfigError("config: cannot open maze file " + cfg.maze);
    std::ostringstream ss;
    ss << in.rdbuf();
    layout = env::parse_maze(ss.str());
  }
  if (cfg.bug_count == 0) {
    layout.bugs.clear();
    return layout;
  }
  return env::inject_bugs(std::move(layout), cfg.bug_seed, {cfg.bug_count, cfg.type1_fraction});
}

env::BlockmazeOptions maze_options(const EnvConfig& cfg) {
  env::BlockmazeOptions o;
  o.step_cap = cfg.maze_step_cap;
  o.retrigger_type1 = cfg.retrigger_type1;
  return o;
}

env::PacGridOptions pac_options(const EnvConfig& cfg) {
  env::PacGridOptions o;
  o.step_cap = cfg.pac_step_cap;
  o.ghosts_enabled = cfg.ghosts;
  o.rearm = cfg.gate_per_episode ? env::GateRearm::kPerEpisode : env::GateRearm::kPerEvaluation;
  return o;
}

env::JsspEnvOptions jssp_options(const EnvConfig& cfg) {
  return {cfg.jobs, cfg.machines, cfg.time_low, cfg.time_high};
}

}  // namespace

EnvSuite::EnvSuite(const ExperimentConfig& cfg)
    : cfg_(cfg.env),
      kind_(cfg.env.kind),
      return_low_(cfg.agent.return_low),
      return_high_(cfg.agent.return_high),
      target_(cfg.agent.target_return) {
  switch (kind_) {
    case EnvKind::kBlockmaze: maze_ = load_maze(cfg_); break;
    case EnvKind::kPacGrid: pac_ = env::default_pacgrid(); break;
    case EnvKind::kJssp: break;
  }
  const auto probe = make_target();
  actions_ = probe->action_count();
  shape_ = probe->observation_shape();
  if (return_low_ && return_high_ && *return_high_ <= *return_low_) {
    throw ConfigError("config: agent.return_high must exceed agent.return_low");
  }
}

std::unique_ptr<Environment> EnvSuite::make_target() const {
  switch (kind_) {
    case EnvKind::kBlockmaze: return std::make_unique<env::Blockmaze>(maze_, maze_options(cfg_));
    case EnvKind::kPacGrid: return std::make_unique<env::PacGrid>(pac_, pac_options(cfg_));
    case EnvKind::kJssp: return std::make_unique<env::JsspEnv>(jssp_options(cfg_));
  }
  throw ConfigError("unknown environment");
}

std::unique_ptr<Environment> EnvSuite::make_family(std::size_t variants) const {
  if (variants == 0) throw ConfigError("pretraining family needs at least one variant");
  std::vector<std::shared_ptr<const Environment>> protos;
  for (std::size_t k = 0; k < variants; ++k) {
    const std::uint64_t seed = mix64(kFamilySalt + k);
    switch (kind_) {
      case EnvKind::kBlockmaze: {
        env::MazeSpec layout = env::generate_maze(maze_.rows, maze_.cols, cfg_.variant_density, seed);
        protos.push_back(std::make_shared<env::Blockmaze>(std::move(layout), maze_options(cfg_)));
        break;
      }
      case EnvKind::kPacGrid: {
        env::PacGridSpec spec = k % 2 ? pac_ : mirrored(pac_);
        spec.ghost_policy_seed = seed;
        env::PacGridOptions o = pac_options(cfg_);
        o.rearm = env::GateRearm::kPerEpisode;
        protos.push_back(std::make_shared<env::PacGrid>(std::move(spec), o));
        break;
      }
      case EnvKind::kJssp:
        // Instance streams differ through the salted reset seed.
        protos.push_back(std::make_shared<env::JsspEnv>(jssp_options(cfg_)));
        break;
    }
  }
  return std::make_unique<FamilyEnv>(std::move(protos));
}

int EnvSuite::expert_action(const Environment& wrapped) const {
  const Environment& e = unwrap(wrapped);
  if (const auto* maze = dynamic_cast<const env::Blockmaze*>(&e)) {
    const auto& spec = maze->spec();
    const int a = first_move_bfs(
        spec.rows, spec.cols, maze->state().agent,
        [&](env::Cell c) { return spec.tile(c) != env::MazeTile::kBlock; }, [&](env::Cell c) { return c == spec.goal; });
    return a < 0 ? 0 : a;
  }
  if (const auto* pac = dynamic_cast<const env::PacGrid*>(&e)) {
    const auto& spec = pac->spec();
    const auto& st = pac->state();
    const auto near_ghost = [&](env::Cell c) {
      for (const env::Cell g : st.ghosts) {
        if (std::abs(g.row - c.row) + std::abs(g.col - c.col) <= 1) return true;
      }
      return false;
    };
    const auto has_dot = [&](env::Cell c) { return st.dots[spec.index(c)] != 0; };
    int a = first_move_bfs(
        spec.rows, spec.cols, st.pac, [&](env::Cell c) { return !spec.wall(c) && !near_ghost(c); }, has_dot);
    if (a < 0) a = first_move_bfs(spec.rows, spec.cols, st.pac, [&](env::Cell c) { return !spec.wall(c); }, has_dot);
    return a < 0 ? static_cast<int>(env::Move::kNoop) : a;
  }
  if (const auto* jssp = dynamic_cast<const env::JsspEnv*>(&e)) {
    const auto& s = jssp->state();
    const auto& inst = s.instance();
    int best = -1;
    std::int64_t best_work = -1;
    for (int j = 0; j < inst.job_count(); ++j) {
      if (s.job_done(j)) continue;
      std::int64_t work = 0;
      for (int k = s.next_op(j); k < inst.ops_per_job(); ++k) work += inst.op(j, k).time;
      if (work > best_work) {
        best_work = work;
        best = j;
      }
    }
    if (best < 0) throw StateError("expert: schedule already complete");
    return best;
  }
  throw ContractError("expert: unsupported environment");
}

std::size_t EnvSuite::patch_count(std::size_t preferred) const {
  std::size_t best = 0;
  for (std::size_t m = 1; m <= shape_.size(); ++m) {
    try {
      (void)seq::choose_tiling(shape_.rows, shape_.cols, m);
    } catch (const ShapeError&) {
      continue;
    }
    const auto gap = [&](std::size_t x) { return x > preferred ? x - preferred : preferred - x; };
    if (best == 0 || gap(m) < gap(best)) best = m;
  }
  return best;
}

seq::ReturnQuantizer EnvSuite::quantizer(std::size_t bins) const {
  double lo = 0.0;
  double hi = 0.0;
  switch (kind_) {
    case EnvKind::kBlockmaze: {
      const env::BlockmazeOptions o = maze_options(cfg_);
      lo = o.step_penalty * o.step_cap;
      hi = o.goal_reward;
      break;
    }
    case EnvKind::kPacGrid: {
      const env::PacGridOptions o = pac_options(cfg_);
      lo = 0.0;
      hi = o.dot_reward * static_cast<double>(pac_.dot_count()) + 4.0 * o.gate_bounty;
      break;
    }
    case EnvKind::kJssp:
      // Returns are H(s_0) - C_max, at least minus the total processing time.
      lo = -static_cast<double>(cfg_.jobs) * cfg_.machines * static_cast<double>(cfg_.time_high);
      hi = 0.0;
      break;
  }
  return seq::ReturnQuantizer(return_low_.value_or(lo), return_high_.value_or(hi), bins);
}

runtime::TokenEncoder::RangeFn EnvSuite::range_fn(std::size_t bins) const {
  if (kind_ != EnvKind::kJssp || return_low_ || return_high_) return {};
  return [bins](const Environment& wrapped) {
    const auto& e = dynamic_cast<const env::JsspEnv&>(unwrap(wrapped));
    const double lo = static_cast<double>(e.initial_lower_bound() - e.instance().total_time());
    return seq::ReturnQuantizer(std::min(lo, -1.0), 0.0, bins);
  };
}

double EnvSuite::target_return() const {
  if (target_) return *target_;
  switch (kind_) {
    case EnvKind::kBlockmaze: {
      const env::BlockmazeOptions o = maze_options(cfg_);
      const int d = maze_distance(maze_);
      return d < 0 ? o.step_penalty * o.step_cap : o.goal_reward + o.step_penalty * (d - 1);
    }
    case EnvKind::kPacGrid: return quantizer(2).hi();
    case EnvKind::kJssp: return 0.0;
  }
  return 0.0;
}

}  // namespace genrl::harness
