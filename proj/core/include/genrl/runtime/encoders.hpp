#pragma once

#include <concepts>
#include <cstddef>
#include <deque>
#include <functional>

#include "genrl/core_types.hpp"
#include "genrl/seq/tokenizer.hpp"

namespace genrl::runtime {

/// Maps the environment's observation stream to model inputs.
template <class E>
concept InputEncoder = std::copy_constructible<E> &&
    requires(E& e, const Environment& env, const Observation& o, const ActionMask& m, int a, double r) {
      typename E::Input;
      { e.reset(env, o, m) } -> std::same_as<typename E::Input>;
      { e.advance(a, r, o, m) } -> std::same_as<typename E::Input>;
    };

/// Passes observations through unchanged.
struct ObservationEncoder {
  using Input = Observation;
  Input reset(const Environment&, const Observation& o, const ActionMask&) { return o; }
  Input advance(int, double, const Observation& o, const ActionMask&) { return o; }
};

/// Rolling K-step token context conditioned on a target return that is
/// reduced by every reward received.
class TokenEncoder {
 public:
  using Input = seq::TokenSequence;
  /// Per-episode return range, consulted at every reset.
  using RangeFn = std::function<seq::ReturnQuantizer(const Environment&)>;

  TokenEncoder(std::size_t patch_count, std::size_t context, seq::ReturnQuantizer quantizer, double target_return,
               RangeFn range = {});

  Input reset(const Environment& env, const Observation& o, const ActionMask& mask);
  Input advance(int action, double reward, const Observation& o, const ActionMask& mask);

  double target_return() const noexcept { return target_; }
  void set_target_return(double r) noexcept { target_ = r; }
  const seq::ReturnQuantizer& quantizer() const noexcept { return quantizer_; }

 private:
  Input current() const;

  std::size_t patch_count_;
  std::size_t patch_size_ = 0;
  std::size_t context_;
  seq::ReturnQuantizer quantizer_;
  RangeFn range_;
  double target_;
  double to_go_ = 0.0;
  std::deque<seq::TimestepTokens> window_;
};

}  // namespace genrl::runtime
