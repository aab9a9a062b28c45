#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "genrl/nn/matrix.hpp"

namespace genrl::vtrace {

struct VTraceConfig {
  double rho_bar = 1.0;
  double c_bar = 1.0;
  double gamma = 0.99;
  double baseline_cost = 0.5;
  double entropy_cost = 0.0006;

  /// Throws ConfigError unless rho_bar >= c_bar > 0, gamma in [0, 1] and
  /// both costs are non-negative.
  void validate() const;
};

struct VTraceResult {
  std::vector<double> targets;        // v_s
  std::vector<double> pg_advantages;  // rho_s (r_s + gamma v_{s+1} - V(x_s))
  std::vector<double> truncated_rhos;
  std::vector<double> truncated_cs;
};

/// values holds V(x_s) .. V(x_{s+n}), the last entry being the bootstrap value
/// (pass 0 for a segment that ends in a terminal state). rewards and ratios
/// (pi / mu) have n entries each.
///
/// Throws ShapeError on length mismatch or n == 0, NumericError on
/// non-finite input, ContractError on a non-positive ratio.
VTraceResult compute_vtrace(std::span<const double> values, std::span<const double> rewards,
                            std::span<const double> ratios, const VTraceConfig& cfg);

/// Gradient of 0.5 * sum_s (v_s - V_s)^2 with respect to each prediction V_s,
/// holding the targets fixed: V_s - v_s.
std::vector<double> value_loss_grad(std::span<const double> targets, std::span<const double> predictions);

/// Same loss for a linear value function V(x) = features * w; returns dL/dw.
/// features is n x d.
std::vector<double> value_grad_direction(std::span<const double> targets, std::span<const double> predictions,
                                         const nn::Matrix& features);

/// Gradient with respect to the logits (n x A) of
///   -sum_s A_s log pi(a_s | x_s) + entropy_cost * sum_s (-H[pi(.|x_s)]).
nn::Matrix policy_grad_direction(std::span<const double> advantages, const nn::Matrix& logits,
                                 std::span<const std::size_t> actions, double entropy_cost);

}  // namespace genrl::vtrace
