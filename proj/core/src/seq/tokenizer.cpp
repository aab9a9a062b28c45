#include "genrl/seq/tokenizer.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "genrl/errors.hpp"

namespace genrl::seq {

int ternarize_reward(double r) noexcept { return (r > 0.0) - (r < 0.0); }

ReturnQuantizer::ReturnQuantizer(double lo, double hi, std::size_t bins) : lo_(lo), hi_(hi), bins_(bins) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("quantizer: need finite lo < hi");
  if (bins < 2) throw ConfigError("quantizer: need at least 2 bins");
}

std::size_t ReturnQuantizer::quantize(double r) const noexcept {
  if (!(r > lo_)) return 0;
  if (r >= hi_) return bins_ - 1;
  const auto b = static_cast<std::size_t>((r - lo_) / bin_width());
  return b < bins_ ? b : bins_ - 1;
}

double ReturnQuantizer::dequantize(std::size_t b) const noexcept {
  if (b >= bins_) b = bins_ - 1;
  return lo_ + (static_cast<double>(b) + 0.5) * bin_width();
}

PatchTiling choose_tiling(std::size_t rows, std::size_t cols, std::size_t m) {
  if (m == 0 || rows == 0 || cols == 0) throw ShapeError("patchify: empty grid or zero patches");
  PatchTiling best;
  double best_skew = 0.0;
  for (std::size_t pr = 1; pr <= m; ++pr) {
    if (m % pr != 0) continue;
    const std::size_t pc = m / pr;
    if (rows % pr != 0 || cols % pc != 0) continue;
    const double h = static_cast<double>(rows / pr), w = static_cast<double>(cols / pc);
    const double skew = std::abs(std::log(h / w));
    if (best.count() == 0 || skew < best_skew) {
      best = {rows, cols, pr, pc};
      best_skew = skew;
    }
  }
  if (best.count() == 0) {
    throw ShapeError("patchify: " + std::to_string(rows) + "x" + std::to_string(cols) + " grid has no tiling into " +
                     std::to_string(m) + " equal patches");
  }
  return best;
}

std::vector<double> patchify(const Observation& obs, std::size_t m) {
  const PatchTiling t = choose_tiling(obs.rows, obs.cols, m);
  std::vector<double> out;
  out.reserve(obs.size());
  for (std::size_t tr = 0; tr < t.tiles_down; ++tr) {
    for (std::size_t tc = 0; tc < t.tiles_across; ++tc) {
      for (std::size_t r = 0; r < t.patch_rows(); ++r) {
        for (std::size_t c = 0; c < t.patch_cols(); ++c) {
          out.push_back(obs.at(tr * t.patch_rows() + r, tc * t.patch_cols() + c));
        }
      }
    }
  }
  return out;
}

Observation unpatchify(std::span<const double> patches, std::size_t rows, std::size_t cols, std::size_t m) {
  const PatchTiling t = choose_tiling(rows, cols, m);
  if (patches.size() != rows * cols) throw ShapeError("unpatchify: patch data does not cover the grid");
  std::vector<double> grid(rows * cols);
  std::size_t k = 0;
  for (std::size_t tr = 0; tr < t.tiles_down; ++tr) {
    for (std::size_t tc = 0; tc < t.tiles_across; ++tc) {
      for (std::size_t r = 0; r < t.patch_rows(); ++r) {
        for (std::size_t c = 0; c < t.patch_cols(); ++c) {
          grid[(tr * t.patch_rows() + r) * cols + tc * t.patch_cols() + c] = patches[k++];
        }
      }
    }
  }
  return Observation(rows, cols, std::move(grid));
}

void TokenSequence::validate(std::size_t return_bins, std::size_t action_count) const {
  if (patch_count == 0 || patch_size == 0) throw ContractError("token sequence: zero patch count or size");
  for (const auto& s : steps) {
    if (s.patches.size() != patch_count * patch_size) throw ContractError("token sequence: wrong patch payload size");
    if (s.return_bin >= return_bins) throw ContractError("token sequence: return token out of vocabulary");
    if (s.action >= action_count) throw ContractError("token sequence: action token out of vocabulary");
    if (s.reward < -1 || s.reward > 1) throw ContractError("token sequence: reward token must be -1, 0 or +1");
    if (!s.mask.empty() && s.mask.size() != action_count) throw ContractError("token sequence: mask width");
  }
}

TimestepTokens encode_step(const Observation& obs, std::size_t m, const ReturnQuantizer& q, double return_to_go,
                           std::size_t action, double reward, ActionMask mask) {
  return {patchify(obs, m), q.quantize(return_to_go), action, ternarize_reward(reward), std::move(mask)};
}

}  // namespace genrl::seq
