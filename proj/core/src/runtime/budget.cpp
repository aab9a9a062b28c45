#include "genrl/runtime/budget.hpp"

#include <cmath>

#include "genrl/errors.hpp"

namespace genrl::runtime {

const char* to_string(BudgetKind k) noexcept {
  switch (k) {
    case BudgetKind::kSteps: return "steps";
    case BudgetKind::kEpisodes: return "episodes";
    case BudgetKind::kSeconds: return "seconds";
  }
  return "?";
}

BudgetKind parse_budget_kind(std::string_view s) {
  if (s == "steps") return BudgetKind::kSteps;
  if (s == "episodes") return BudgetKind::kEpisodes;
  if (s == "seconds") return BudgetKind::kSeconds;
  throw ConfigError("unknown budget kind '" + std::string(s) + "'");
}

BudgetTracker::BudgetTracker(BudgetKind kind, double amount) : kind_(kind), amount_(amount) {
  if (!(amount >= 0.0) || !std::isfinite(amount)) throw ConfigError("budget: amount must be finite and >= 0");
  if (kind != BudgetKind::kSeconds && amount != std::floor(amount)) {
    throw ConfigError("budget: step and episode budgets must be whole numbers");
  }
}

void BudgetTracker::start() {
  start_ = std::chrono::steady_clock::now();
  started_clock_ = true;
}

double BudgetTracker::elapsed_seconds() const {
  if (!started_clock_) return 0.0;
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

bool BudgetTracker::try_consume_step() {
  if (kind_ != BudgetKind::kSteps) {
    if (exhausted()) return false;
    ++steps_;
    return true;
  }
  const auto cap = static_cast<std::uint64_t>(amount_);
  std::uint64_t cur = steps_.load();
  while (cur < cap) {
    if (steps_.compare_exchange_weak(cur, cur + 1)) return true;
  }
  return false;
}

bool BudgetTracker::try_begin_episode() {
  if (kind_ != BudgetKind::kEpisodes) return !exhausted();
  const auto cap = static_cast<std::uint64_t>(amount_);
  std::uint64_t cur = started_.load();
  while (cur < cap) {
    if (started_.compare_exchange_weak(cur, cur + 1)) return true;
  }
  return false;
}

void BudgetTracker::end_episode() { ++completed_; }

bool BudgetTracker::exhausted() const {
  switch (kind_) {
    case BudgetKind::kSteps: return static_cast<double>(steps_.load()) >= amount_;
    case BudgetKind::kEpisodes: return static_cast<double>(completed_.load()) >= amount_;
    case BudgetKind::kSeconds: return amount_ <= 0.0 || elapsed_seconds() >= amount_;
  }
  return true;
}

double BudgetTracker::consumed() const {
  switch (kind_) {
    case BudgetKind::kSteps: return static_cast<double>(steps_.load());
    case BudgetKind::kEpisodes: return static_cast<double>(completed_.load());
    case BudgetKind::kSeconds: return elapsed_seconds();
  }
  return 0.0;
}

double BudgetTracker::remaining() const {
  const double r = amount_ - consumed();
  return r > 0.0 ? r : 0.0;
}

}  // namespace genrl::runtime
