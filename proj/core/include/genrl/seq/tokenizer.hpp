#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "genrl/core_types.hpp"

namespace genrl::seq {

/// Sign of r with exact zero mapped to 0.
int ternarize_reward(double r) noexcept;

/// Uniform binning of returns over [lo, hi], clamped at both ends.
class ReturnQuantizer {
 public:
  /// Throws ConfigError unless lo < hi and bins >= 2.
  ReturnQuantizer(double lo, double hi, std::size_t bins = 64);

  std::size_t quantize(double r) const noexcept;
  /// Midpoint of bin b.
  double dequantize(std::size_t b) const noexcept;

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t bins() const noexcept { return bins_; }
  double bin_width() const noexcept { return (hi_ - lo_) / static_cast<double>(bins_); }

 private:
  double lo_;
  double hi_;
  std::size_t bins_;
};

/// pr x pc tiling of a rows x cols grid into equal patches.
struct PatchTiling {
  std::size_t grid_rows = 0;
  std::size_t grid_cols = 0;
  std::size_t tiles_down = 0;    // pr
  std::size_t tiles_across = 0;  // pc

  std::size_t count() const noexcept { return tiles_down * tiles_across; }
  std::size_t patch_rows() const noexcept { return grid_rows / tiles_down; }
  std::size_t patch_cols() const noexcept { return grid_cols / tiles_across; }
  std::size_t patch_size() const noexcept { return patch_rows() * patch_cols(); }
};

/// Factorization M = pr * pc dividing the grid exactly, preferring the most
/// square patches. Throws ShapeError when none exists.
PatchTiling choose_tiling(std::size_t rows, std::size_t cols, std::size_t m);

/// Row-major patches, each flattened row-major: M * patch_size values.
std::vector<double> patchify(const Observation& obs, std::size_t m);
Observation unpatchify(std::span<const double> patches, std::size_t rows, std::size_t cols, std::size_t m);

/// One timestep: M patches, then return, action and reward tokens.
struct TimestepTokens {
  std::vector<double> patches;  // M * P continuous values
  std::size_t return_bin = 0;
  std::size_t action = 0;
  int reward = 0;  // -1, 0 or +1
  ActionMask mask;
};

struct TokenSequence {
  std::size_t patch_count = 0;  // M
  std::size_t patch_size = 0;   // P
  std::vector<TimestepTokens> steps;

  std::size_t length() const noexcept { return steps.size(); }
  /// Tokens per timestep: M + 3.
  std::size_t tokens_per_step() const noexcept { return patch_count + 3; }
  /// Flat position of the return token of timestep t, where actions are read.
  std::size_t return_position(std::size_t t) const noexcept { return t * tokens_per_step() + patch_count; }

  /// Throws ContractError when patch sizes or token ids leave their vocabularies.
  void validate(std::size_t return_bins, std::size_t action_count) const;
};

/// Token view of one environment step.
TimestepTokens encode_step(const Observation& obs, std::size_t m, const ReturnQuantizer& q, double return_to_go,
                           std::size_t action, double reward, ActionMask mask = {});

}  // namespace genrl::seq
