#pragma once

#include <cstdint>
#include <memory>
#include <mutex>

namespace genrl::runtime {

template <class M>
struct PolicySnapshot {
  M model;
  std::uint64_t version = 0;
};

/// Latest published parameters. Snapshots are immutable; each publish gets
/// the next version number.
template <class M>
class PolicyStore {
 public:
  explicit PolicyStore(M initial)
      : current_(std::make_shared<const PolicySnapshot<M>>(PolicySnapshot<M>{std::move(initial), 0})) {}

  std::shared_ptr<const PolicySnapshot<M>> snapshot() const {
    std::lock_guard lock(mu_);
    return current_;
  }

  std::uint64_t publish(const M& model) {
    std::lock_guard lock(mu_);
    const std::uint64_t v = current_->version + 1;
    current_ = std::make_shared<const PolicySnapshot<M>>(PolicySnapshot<M>{model, v});
    return v;
  }

  std::uint64_t version() const {
    std::lock_guard lock(mu_);
    return current_->version;
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const PolicySnapshot<M>> current_;
};

}  // namespace genrl::runtime
