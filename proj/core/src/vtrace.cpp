#include "genrl/vtrace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "genrl/errors.hpp"

namespace genrl::vtrace {

void VTraceConfig::validate() const {
  if (!(c_bar > 0.0) || !(rho_bar >= c_bar)) throw ConfigError("vtrace: need rho_bar >= c_bar > 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("vtrace: gamma must lie in [0, 1]");
  if (!(baseline_cost >= 0.0) || !(entropy_cost >= 0.0)) throw ConfigError("vtrace: costs must be >= 0");
}

namespace {

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw NumericError(std::string("vtrace: non-finite ") + what);
  }
}

}  // namespace

VTraceResult compute_vtrace(std::span<const double> values, std::span<const double> rewards,
                            std::span<const double> ratios, const VTraceConfig& cfg) {
  cfg.validate();
  const std::size_t n = rewards.size();
  if (n == 0) throw ShapeError("vtrace: empty segment");
  if (ratios.size() != n || values.size() != n + 1) {
    throw ShapeError("vtrace: need n rewards, n ratios and n + 1 values");
  }
  require_finite(values, "value");
  require_finite(rewards, "reward");
  require_finite(ratios, "ratio");
  for (double r : ratios) {
    if (r <= 0.0) throw ContractError("vtrace: importance ratios must be positive");
  }

  VTraceResult out;
  out.targets.resize(n);
  out.pg_advantages.resize(n);
  out.truncated_rhos.resize(n);
  out.truncated_cs.resize(n);

  // v_s - V_s = delta_s + gamma c_s (v_{s+1} - V_{s+1})
  double carry = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double rho = std::min(cfg.rho_bar, ratios[i]);
    const double c = std::min(cfg.c_bar, ratios[i]);
    out.truncated_rhos[i] = rho;
    out.truncated_cs[i] = c;
    const double delta = rho * (rewards[i] + cfg.gamma * values[i + 1] - values[i]);
    carry = delta + cfg.gamma * c * carry;
    out.targets[i] = values[i] + carry;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double next = i + 1 < n ? out.targets[i + 1] : values[n];
    out.pg_advantages[i] = out.truncated_rhos[i] * (rewards[i] + cfg.gamma * next - values[i]);
  }
  return out;
}

std::vector<double> value_loss_grad(std::span<const double> targets, std::span<const double> predictions) {
  if (targets.size() != predictions.size()) throw ShapeError("value_loss_grad: length mismatch");
  std::vector<double> g(targets.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = predictions[i] - targets[i];
  return g;
}

std::vector<double> value_grad_direction(std::span<const double> targets, std::span<const double> predictions,
                                         const nn::Matrix& features) {
  if (features.rows != targets.size()) throw ShapeError("value_grad_direction: feature rows != segment length");
  const auto dv = value_loss_grad(targets, predictions);
  std::vector<double> g(features.cols, 0.0);
  for (std::size_t s = 0; s < features.rows; ++s) {
    for (std::size_t k = 0; k < features.cols; ++k) g[k] += dv[s] * features(s, k);
  }
  return g;
}

nn::Matrix policy_grad_direction(std::span<const double> advantages, const nn::Matrix& logits,
                                 std::span<const std::size_t> actions, double entropy_cost) {
  if (advantages.size() != logits.rows || actions.size() != logits.rows) {
    throw ShapeError("policy_grad_direction: advantages, actions and logits rows must agree");
  }
  nn::Matrix grad(logits.rows, logits.cols);
  std::vector<double> p(logits.cols);
  for (std::size_t s = 0; s < logits.rows; ++s) {
    if (actions[s] >= logits.cols) throw std::out_of_range("policy_grad_direction: action index");
    const auto z = logits.row_span(s);
    const double zmax = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) total += (p[k] = std::exp(z[k] - zmax));
    double entropy = 0.0;
    for (auto& pk : p) {
      pk /= total;
      if (pk > 0.0) entropy -= pk * std::log(pk);
    }
    for (std::size_t k = 0; k < z.size(); ++k) {
      const double onehot = k == actions[s] ? 1.0 : 0.0;
      const double logp = p[k] > 0.0 ? std::log(p[k]) : 0.0;
      grad(s, k) = -advantages[s] * (onehot - p[k]) + entropy_cost * p[k] * (logp + entropy);
    }
  }
  return grad;
}

}  // namespace genrl::vtrace
