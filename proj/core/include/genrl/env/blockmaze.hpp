#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "genrl/core_types.hpp"
#include "genrl/env/grid.hpp"

namespace genrl::env {

enum class MazeTile : std::uint8_t { kFree = 0, kBlock = 1, kGoal = 2 };

enum class BugType : int {
  kExploratory = 1,      // reachable free cell; recorded, play continues
  kInvalidLocation = 2,  // block cell; the attempted entry ends the episode
};

struct MazeBug {
  int id = 0;
  Cell cell;
  BugType type = BugType::kExploratory;
  bool operator==(const MazeBug&) const = default;
};

/// Maze layout plus injected bugs.
///
/// Text form, one row per line: '.' free, '#' block, 'G' goal, 'S' start,
/// '1' Type-1 bug (free underneath), '2' Type-2 bug (block underneath).
struct MazeSpec {
  int rows = 0;
  int cols = 0;
  std::vector<MazeTile> tiles;
  Cell start;
  Cell goal;
  std::vector<MazeBug> bugs;
  std::uint64_t seed = 0;

  bool in_bounds(Cell c) const noexcept { return c.row >= 0 && c.col >= 0 && c.row < rows && c.col < cols; }
  MazeTile tile(Cell c) const { return tiles[static_cast<std::size_t>(c.row * cols + c.col)]; }
  MazeTile& tile(Cell c) { return tiles[static_cast<std::size_t>(c.row * cols + c.col)]; }
  /// Bug id at c, or -1.
  int bug_at(Cell c) const noexcept;
  std::size_t count_bugs(BugType type) const noexcept;

  bool operator==(const MazeSpec& o) const {
    return rows == o.rows && cols == o.cols && tiles == o.tiles && start == o.start && goal == o.goal &&
           bugs == o.bugs;
  }
};

/// Throws ParseError on unknown glyphs, ragged rows, or missing/duplicate S/G.
MazeSpec parse_maze(std::string_view text);
std::string format_maze(const MazeSpec& spec);

/// The shipped 20x20 evaluation layout (no bugs).
MazeSpec default_maze();
/// A 10x10 layout used for desk-scale learning checks (no bugs).
MazeSpec small_maze();
/// Random layout with the given block density and a reachable goal. The
/// border is always blocked.
MazeSpec generate_maze(int rows, int cols, double block_density, std::uint64_t seed);

/// Cells reachable from start through non-block cells (4-neighbourhood).
std::vector<Cell> reachable_cells(const MazeSpec& spec);

struct BugInjectionOptions {
  int bug_count = 25;
  double type1_fraction = 0.5;  // Type-1 count = round(bug_count * fraction)
};

/// Places bugs on a copy of layout (existing bugs are discarded). Type-1
/// bugs go on reachable free cells other than start/goal; Type-2 bugs on block
/// cells bordering the reachable region. Deterministic in seed. Throws
/// ConfigError when either candidate pool is smaller than its bug count.
MazeSpec inject_bugs(MazeSpec layout, std::uint64_t seed, BugInjectionOptions options = {});

struct BlockmazeOptions {
  double step_penalty = -1.0;
  double goal_reward = 100.0;
  int step_cap = 400;
  /// When false a Type-1 bug raises an event only on its first entry per episode.
  bool retrigger_type1 = true;
};

struct MazeState {
  Cell agent;
  int steps_taken = 0;
  std::set<int> triggered_bugs;
  bool done = false;
};

/// Blockmaze bug-hunting environment. Actions: 0 north, 1 south, 2 east,
/// 3 west. Observation: rows x cols codes (0 free, 1 block, 2 goal, 3 agent);
/// bugs are not visible.
class Blockmaze final : public Environment {
 public:
  explicit Blockmaze(MazeSpec spec, BlockmazeOptions options = {});

  std::size_t action_count() const override { return 4; }
  ObservationShape observation_shape() const override {
    return {static_cast<std::size_t>(spec_.rows), static_cast<std::size_t>(spec_.cols)};
  }
  Observation reset(std::uint64_t seed = 0) override;
  StepResult step(int action) override;
  Observation observe() const override;
  bool done() const override { return state_.done; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<Blockmaze>(*this); }

  const MazeSpec& spec() const noexcept { return spec_; }
  const MazeState& state() const noexcept { return state_; }
  const BlockmazeOptions& options() const noexcept { return options_; }

 private:
  MazeSpec spec_;
  BlockmazeOptions options_;
  MazeState state_;
  std::vector<int> bug_index_;  // per cell, -1 if none
};

/// Distinct and total bug triggers over an evaluation.
class BugCensus {
 public:
  explicit BugCensus(const MazeSpec& spec);

  void record(std::span<const int> bug_events);
  std::size_t distinct(BugType type) const noexcept;
  std::size_t total_triggers() const noexcept { return total_; }
  std::size_t triggers(BugType type) const noexcept;
  const std::set<int>& distinct_ids() const noexcept { return seen_; }

 private:
  std::vector<BugType> types_;
  std::set<int> seen_;
  std::size_t total_ = 0;
  std::size_t per_type_[2] = {0, 0};
};

}  // namespace genrl::env
