#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include "genrl/core_types.hpp"
#include "genrl/env/blockmaze.hpp"
#include "genrl/env/pacgrid.hpp"
#include "genrl/harness/config.hpp"
#include "genrl/runtime/encoders.hpp"
#include "genrl/seq/tokenizer.hpp"

namespace genrl::harness {

/// The configured target environment plus its pre-training family, heuristic
/// expert and return-token range.
class EnvSuite {
 public:
  explicit EnvSuite(const ExperimentConfig& cfg);

  EnvKind kind() const noexcept { return kind_; }
  std::size_t action_count() const noexcept { return actions_; }
  ObservationShape observation_shape() const noexcept { return shape_; }

  /// Fine-tuning and evaluation environment.
  std::unique_ptr<Environment> make_target() const;
  /// Pre-training environment: every reset picks one of `variants` seeded
  /// variants of the target (maze layouts, mirrored pac layouts, instance
  /// streams), none identical to the target layout.
  std::unique_ptr<Environment> make_family(std::size_t variants) const;

  /// Heuristic demonstrator: shortest path to the goal, nearest safe dot,
  /// or most-work-remaining dispatching.
  int expert_action(const Environment& env) const;

  /// Patch count closest to `preferred` that tiles the observation grid.
  std::size_t patch_count(std::size_t preferred) const;

  seq::ReturnQuantizer quantizer(std::size_t bins) const;
  /// Per-episode range for environments whose return scale varies by episode.
  runtime::TokenEncoder::RangeFn range_fn(std::size_t bins) const;
  double target_return() const;

  const env::MazeSpec& maze() const { return maze_; }

 private:
  EnvConfig cfg_;
  EnvKind kind_;
  std::size_t actions_ = 0;
  ObservationShape shape_;
  env::MazeSpec maze_;
  env::PacGridSpec pac_;
  std::optional<double> return_low_;
  std::optional<double> return_high_;
  std::optional<double> target_;
};

}  // namespace genrl::harness
