#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "genrl/core_types.hpp"
#include "genrl/env/grid.hpp"

namespace genrl::env {

/// Pac-grid layout.
///
/// Text form: '#' wall, '.' free, 'o' dot, 'A'..'D' gates 1..4, 'P' pac
/// start, 'g' ghost start. Gates, P and g sit on free cells without dots.
struct PacGridSpec {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> walls;  // 1 = wall
  std::vector<std::uint8_t> dots;   // 1 = dot
  std::array<Cell, 4> gates{};
  Cell pac_start;
  std::vector<Cell> ghost_starts;
  std::uint64_t ghost_policy_seed = 0;

  bool in_bounds(Cell c) const noexcept { return c.row >= 0 && c.col >= 0 && c.row < rows && c.col < cols; }
  std::size_t index(Cell c) const noexcept { return static_cast<std::size_t>(c.row * cols + c.col); }
  bool wall(Cell c) const noexcept { return !in_bounds(c) || walls[index(c)] != 0; }
  /// Gate number 1..4 at c, or 0.
  int gate_at(Cell c) const noexcept;
  std::size_t dot_count() const noexcept;

  bool operator==(const PacGridSpec&) const = default;
};

PacGridSpec parse_pacgrid(std::string_view text);
std::string format_pacgrid(const PacGridSpec& spec);
/// The shipped 21x19 corridor layout with two ghosts and four gates.
PacGridSpec default_pacgrid();

enum class GateRearm {
  kPerEvaluation,  // bounty paid on the first entry of a gate within an evaluation
  kPerEpisode,     // bounty re-armed at every reset
};

struct PacGridOptions {
  double dot_reward = 1.0;
  double gate_bounty = 50.0;
  int step_cap = 500;  // 0 = unlimited
  bool ghosts_enabled = true;
  double ghost_continue_prob = 0.8;
  GateRearm rearm = GateRearm::kPerEvaluation;
};

struct PacGridState {
  Cell pac;
  std::vector<Cell> ghosts;
  std::vector<Move> ghost_headings;
  std::vector<std::uint8_t> dots;
  std::size_t dots_remaining = 0;
  std::set<int> triggered_gates;  // this episode
  double score = 0.0;
  int steps_taken = 0;
  bool done = false;
};

/// Symbolic MsPacman stand-in. Actions: 0 north, 1 south, 2 east, 3 west,
/// 4 noop. Observation codes: 0 free, 1 wall, 2 dot, 3 gate, 4 pac, 5 ghost.
/// Ghost motion depends only on (spec, reset seed, step index).
class PacGrid final : public Environment {
 public:
  explicit PacGrid(PacGridSpec spec, PacGridOptions options = {});

  std::size_t action_count() const override { return 5; }
  ObservationShape observation_shape() const override {
    return {static_cast<std::size_t>(spec_.rows), static_cast<std::size_t>(spec_.cols)};
  }
  Observation reset(std::uint64_t seed = 0) override;
  StepResult step(int action) override;
  Observation observe() const override;
  bool done() const override { return state_.done; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<PacGrid>(*this); }

  /// Starts a new evaluation window: every gate bounty is re-armed.
  void begin_evaluation() { evaluation_gates_.clear(); }

  const PacGridSpec& spec() const noexcept { return spec_; }
  const PacGridState& state() const noexcept { return state_; }
  const PacGridOptions& options() const noexcept { return options_; }
  std::size_t dots_eaten() const noexcept { return initial_dots_ - state_.dots_remaining; }
  std::size_t bounties_paid() const noexcept { return bounties_this_episode_; }

 private:
  void move_ghosts();
  bool ghost_contact() const;

  PacGridSpec spec_;
  PacGridOptions options_;
  PacGridState state_;
  Rng ghost_rng_;
  std::set<int> evaluation_gates_;
  std::size_t initial_dots_ = 0;
  std::size_t bounties_this_episode_ = 0;
};

/// Gate entries over an evaluation, per gate 1..4.
class GateCensus {
 public:
  void record(std::span<const int> gate_events);
  void end_episode();

  /// Every entry event.
  const std::array<std::size_t, 4>& entries() const noexcept { return entries_; }
  /// Sum over episodes of gates entered at least once in that episode.
  const std::array<std::size_t, 4>& per_episode_distinct() const noexcept { return per_episode_; }
  /// Gates entered at least once in the whole evaluation (0 or 1 each).
  std::array<std::size_t, 4> evaluation_distinct() const noexcept;

 private:
  std::array<std::size_t, 4> entries_{};
  std::array<std::size_t, 4> per_episode_{};
  std::set<int> episode_seen_;
  std::set<int> seen_;
};

}  // namespace genrl::env
