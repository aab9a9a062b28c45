#include "genrl/runtime/encoders.hpp"

#include "genrl/errors.hpp"

namespace genrl::runtime {

TokenEncoder::TokenEncoder(std::size_t patch_count, std::size_t context, seq::ReturnQuantizer quantizer,
                           double target_return, RangeFn range)
    : patch_count_(patch_count),
      context_(context),
      quantizer_(quantizer),
      range_(std::move(range)),
      target_(target_return) {
  if (patch_count_ == 0 || context_ == 0) throw ConfigError("token encoder: patch count and context must be >= 1");
}

TokenEncoder::Input TokenEncoder::reset(const Environment& env, const Observation& o, const ActionMask& mask) {
  if (range_) quantizer_ = range_(env);
  window_.clear();
  to_go_ = target_;
  window_.push_back(seq::encode_step(o, patch_count_, quantizer_, to_go_, 0, 0.0, mask));
  patch_size_ = o.size() / patch_count_;
  return current();
}

TokenEncoder::Input TokenEncoder::advance(int action, double reward, const Observation& o, const ActionMask& mask) {
  if (window_.empty()) throw StateError("token encoder: advance before reset");
  window_.back().action = static_cast<std::size_t>(action);
  window_.back().reward = seq::ternarize_reward(reward);
  to_go_ -= reward;
  window_.push_back(seq::encode_step(o, patch_count_, quantizer_, to_go_, 0, 0.0, mask));
  while (window_.size() > context_) window_.pop_front();
  return current();
}

TokenEncoder::Input TokenEncoder::current() const {
  Input seq;
  seq.patch_count = patch_count_;
  seq.patch_size = patch_size_;
  seq.steps.assign(window_.begin(), window_.end());
  return seq;
}

}  // namespace genrl::runtime
