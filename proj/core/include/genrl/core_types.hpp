#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "genrl/rng.hpp"

namespace genrl {

/// Row-major grid of cell codes or a flat feature vector (rows == 1).
struct Observation {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Observation() = default;
  Observation(std::size_t r, std::size_t c, std::vector<double> v);
  static Observation flat(std::vector<double> v);

  std::size_t size() const noexcept { return values.size(); }
  double at(std::size_t r, std::size_t c) const { return values.at(r * cols + c); }

  bool operator==(const Observation&) const = default;
};

struct ObservationShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const noexcept { return rows * cols; }
  bool operator==(const ObservationShape&) const = default;
};

/// Per-action validity flags; empty means every action is allowed.
using ActionMask = std::vector<std::uint8_t>;

bool action_allowed(const ActionMask& mask, std::size_t action) noexcept;

struct Transition {
  Observation observation;
  int action = 0;
  double reward = 0.0;
  Observation next_observation;
  bool terminal = false;
  double behavior_log_prob = 0.0;  // log mu(a|x)
  ActionMask action_mask;
  ActionMask next_action_mask;
};

/// Ordered transitions of (part of) one episode. At most one terminal
/// transition, and only at the end. episode_return tracks the undiscounted
/// reward sum of the stored transitions.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<Transition> transitions);

  /// Throws StateError after a terminal transition and ContractError when the
  /// behavior log-prob is positive or non-finite.
  void push_back(Transition t);

  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  const Transition& operator[](std::size_t i) const { return transitions_[i]; }
  std::size_t length() const noexcept { return transitions_.size(); }
  bool empty() const noexcept { return transitions_.empty(); }
  double episode_return() const noexcept { return episode_return_; }
  bool terminated() const noexcept {
    return !transitions_.empty() && transitions_.back().terminal;
  }
  std::vector<double> rewards() const;

 private:
  std::vector<Transition> transitions_;
  double episode_return_ = 0.0;
};

/// Probability vector over a discrete action set.
class DiscretePolicyDist {
 public:
  /// Throws InvalidDistributionError for negative, non-finite or
  /// non-normalized (|sum - 1| > 1e-9) input.
  explicit DiscretePolicyDist(std::vector<double> probs);

  static DiscretePolicyDist uniform(std::size_t action_count);
  /// Softmax of logits; masked-out actions get probability zero.
  static DiscretePolicyDist from_logits(std::span<const double> logits,
                                        const ActionMask& mask = {},
                                        double temperature = 1.0);

  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t action_count() const noexcept { return probs_.size(); }

  /// Shannon entropy in nats, with 0 ln 0 := 0.
  double entropy() const noexcept;
  /// ln p(a); -infinity for zero-probability actions. Throws std::out_of_range.
  double log_prob(std::size_t action) const;
  std::size_t sample(Rng& rng) const;
  std::size_t argmax() const noexcept;

 private:
  std::vector<double> probs_;
};

/// sum_i gamma^i * rewards[i]; zero for an empty list.
double discounted_return(std::span<const double> rewards, double gamma);

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  /// Environment-specific event ids (bug ids, gate numbers) raised by the step.
  std::vector<int> events;
};

/// Contract shared by every task environment. Calling step() after a
/// terminal step without reset() throws StateError.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t action_count() const = 0;
  virtual ObservationShape observation_shape() const = 0;
  virtual Observation reset(std::uint64_t seed) = 0;
  virtual StepResult step(int action) = 0;
  virtual Observation observe() const = 0;
  virtual bool done() const = 0;
  virtual ActionMask action_mask() const { return {}; }
  virtual std::unique_ptr<Environment> clone() const = 0;
};

}  // namespace genrl
