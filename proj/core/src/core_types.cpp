#include "genrl/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "genrl/errors.hpp"

namespace genrl {

Observation::Observation(std::size_t r, std::size_t c, std::vector<double> v)
    : rows(r), cols(c), values(std::move(v)) {
  if (values.size() != rows * cols) {
    throw ShapeError("observation: " + std::to_string(values.size()) +
                     " values for shape " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
}

Observation Observation::flat(std::vector<double> v) {
  const std::size_t n = v.size();
  return Observation(1, n, std::move(v));
}

bool action_allowed(const ActionMask& mask, std::size_t action) noexcept {
  return mask.empty() || (action < mask.size() && mask[action] != 0);
}

Trajectory::Trajectory(std::vector<Transition> transitions) {
  transitions_.reserve(transitions.size());
  for (auto& t : transitions) push_back(std::move(t));
}

void Trajectory::push_back(Transition t) {
  if (terminated()) throw StateError("trajectory: transition appended after terminal");
  if (!(t.behavior_log_prob <= 0.0)) {
    throw ContractError("trajectory: behavior log-prob must be finite and <= 0");
  }
  episode_return_ += t.reward;
  transitions_.push_back(std::move(t));
}

std::vector<double> Trajectory::rewards() const {
  std::vector<double> out;
  out.reserve(transitions_.size());
  for (const auto& t : transitions_) out.push_back(t.reward);
  return out;
}

DiscretePolicyDist::DiscretePolicyDist(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidDistributionError("distribution: empty support");
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw InvalidDistributionError("distribution: negative or non-finite probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw InvalidDistributionError("distribution: probabilities sum to " + std::to_string(sum));
  }
}

DiscretePolicyDist DiscretePolicyDist::uniform(std::size_t action_count) {
  return DiscretePolicyDist(std::vector<double>(action_count, 1.0 / static_cast<double>(action_count)));
}

DiscretePolicyDist DiscretePolicyDist::from_logits(std::span<const double> logits,
                                                   const ActionMask& mask, double temperature) {
  if (logits.empty()) throw InvalidDistributionError("distribution: empty logits");
  if (!mask.empty() && mask.size() != logits.size()) {
    throw ShapeError("distribution: mask size does not match logits");
  }
  std::vector<double> probs(logits.size(), 0.0);
  std::size_t best = logits.size();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!action_allowed(mask, i)) continue;
    if (!std::isfinite(logits[i])) throw NumericError("distribution: non-finite logit");
    if (best == logits.size() || logits[i] > logits[best]) best = i;
  }
  if (best == logits.size()) throw InvalidDistributionError("distribution: every action masked");
  if (temperature <= 0.0) {
    probs[best] = 1.0;
    return DiscretePolicyDist(std::move(probs));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!action_allowed(mask, i)) continue;
    probs[i] = std::exp((logits[i] - logits[best]) / temperature);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return DiscretePolicyDist(std::move(probs));
}

double DiscretePolicyDist::entropy() const noexcept {
  double h = 0.0;
  for (double p : probs_) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double DiscretePolicyDist::log_prob(std::size_t action) const {
  if (action >= probs_.size()) {
    throw std::out_of_range("distribution: action " + std::to_string(action) +
                            " out of range for " + std::to_string(probs_.size()) + " actions");
  }
  const double p = probs_[action];
  return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

std::size_t DiscretePolicyDist::sample(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (probs_[i] <= 0.0) continue;
    acc += probs_[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

std::size_t DiscretePolicyDist::argmax() const noexcept {
  return static_cast<std::size_t>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

double discounted_return(std::span<const double> rewards, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("discounted_return: gamma outside [0, 1]");
  double total = 0.0;
  double weight = 1.0;
  for (double r : rewards) {
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

}  // namespace genrl
