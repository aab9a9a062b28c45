#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace genrl::runtime {

enum class BudgetKind { kSteps, kEpisodes, kSeconds };

const char* to_string(BudgetKind k) noexcept;
/// Throws ConfigError for unknown names.
BudgetKind parse_budget_kind(std::string_view s);

/// Thread-safe accounting of a fine-tuning budget.
///
/// Steps are reserved one at a time and never exceed the amount. Episodes are
/// reserved at start and the budget is spent once that many have completed.
/// Seconds count from start() and are checked by the caller between updates.
class BudgetTracker {
 public:
  BudgetTracker(BudgetKind kind, double amount);

  BudgetKind kind() const noexcept { return kind_; }
  double amount() const noexcept { return amount_; }

  void start();
  /// Reserves one environment step; false once the step budget is spent or
  /// another kind of budget is exhausted.
  bool try_consume_step();
  /// Reserves the start of an episode; false when no episode may begin.
  bool try_begin_episode();
  void end_episode();

  bool exhausted() const;
  double consumed() const;
  double remaining() const;

  std::uint64_t steps() const noexcept { return steps_.load(); }
  std::uint64_t episodes_completed() const noexcept { return completed_.load(); }
  double elapsed_seconds() const;

 private:
  BudgetKind kind_;
  double amount_;
  std::atomic<std::uint64_t> steps_{0};
  std::atomic<std::uint64_t> started_{0};
  std::atomic<std::uint64_t> completed_{0};
  std::chrono::steady_clock::time_point start_{};
  std::atomic<bool> started_clock_{false};
};

}  // namespace genrl::runtime
