#pragma once

#include <cstddef>
#include <deque>

#include "genrl/errors.hpp"
#include "genrl/rng.hpp"

namespace genrl::runtime {

/// FIFO-evicting store with uniform sampling.
template <class T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("replay buffer: capacity must be >= 1");
  }

  void push(T item) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(item));
    ++inserted_;
  }

  /// Throws StateError when empty.
  const T& sample(Rng& rng) const {
    if (items_.empty()) throw StateError("replay buffer: sample from empty buffer");
    return items_[rng.below(items_.size())];
  }

  const T& operator[](std::size_t i) const { return items_[i]; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t inserted() const noexcept { return inserted_; }
  void clear() noexcept { items_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
  std::size_t inserted_ = 0;
};

}  // namespace genrl::runtime
