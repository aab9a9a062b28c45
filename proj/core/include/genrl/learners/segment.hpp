#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "genrl/core_types.hpp"
#include "genrl/errors.hpp"

namespace genrl::learners {

/// Up to n consecutive steps of one actor under one policy snapshot.
template <class Input>
struct Segment {
  std::vector<Input> inputs;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<double> behavior_log_probs;  // log mu(a_t | x_t)
  std::vector<ActionMask> masks;           // empty, or one per step
  bool terminal = false;
  /// Input after the last step; required when the segment is not terminal.
  std::optional<Input> bootstrap;
  std::uint64_t policy_version = 0;
  std::size_t actor = 0;

  std::size_t length() const noexcept { return actions.size(); }

  /// Throws ContractError on inconsistent lengths, missing or invalid
  /// behavior log-probs, or a missing bootstrap on a non-terminal segment.
  void validate() const {
    const std::size_t n = actions.size();
    if (n == 0) throw ContractError("segment: empty");
    if (inputs.size() != n || rewards.size() != n) throw ContractError("segment: ragged inputs/rewards");
    if (behavior_log_probs.size() != n) throw ContractError("segment: missing behavior log-probs");
    for (double lp : behavior_log_probs) {
      if (!(lp <= 0.0) || !std::isfinite(lp)) throw ContractError("segment: behavior log-prob must be finite and <= 0");
    }
    if (!masks.empty() && masks.size() != n) throw ContractError("segment: one mask per step required");
    if (!terminal && !bootstrap) throw ContractError("segment: non-terminal segment without bootstrap input");
  }
};

/// One replayable step for value-based learning.
template <class Input>
struct QTransition {
  Input input;
  int action = 0;
  double reward = 0.0;
  Input next_input;
  bool terminal = false;
  ActionMask next_mask;
};

}  // namespace genrl::learners
