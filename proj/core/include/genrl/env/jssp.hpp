#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "genrl/core_types.hpp"

namespace genrl::env {

struct Operation {
  int machine = 0;
  std::int64_t time = 1;
  bool operator==(const Operation&) const = default;
};

/// |J| x |M| job-shop instance: every job visits machines in its own order.
class JsspInstance {
 public:
  JsspInstance() = default;
  /// Throws ConfigError on an empty instance, ragged jobs, machine ids out of
  /// range, or processing times < 1.
  JsspInstance(int machines, std::vector<std::vector<Operation>> jobs);

  int job_count() const noexcept { return static_cast<int>(jobs_.size()); }
  int machine_count() const noexcept { return machines_; }
  int ops_per_job() const noexcept { return jobs_.empty() ? 0 : static_cast<int>(jobs_.front().size()); }
  std::size_t operation_count() const noexcept { return jobs_.size() * static_cast<std::size_t>(ops_per_job()); }
  const Operation& op(int job, int index) const { return jobs_[static_cast<std::size_t>(job)][static_cast<std::size_t>(index)]; }
  const std::vector<std::vector<Operation>>& jobs() const noexcept { return jobs_; }
  std::int64_t total_time() const noexcept;

  bool operator==(const JsspInstance&) const = default;

 private:
  int machines_ = 0;
  std::vector<std::vector<Operation>> jobs_;
};

/// Taillard-style instance: i.i.d. integer times in [time_low, time_high],
/// each job's route a uniform permutation of all machines.
JsspInstance generate_taillard(int jobs, int machines, std::int64_t time_low, std::int64_t time_high,
                               std::uint64_t seed);

/// Taillard text: "J M" then J lines of M "machine time" pairs.
JsspInstance parse_instance(std::string_view text);
std::string format_instance(const JsspInstance& instance);

/// Partial schedule under append (non-delay, no insertion) dispatching.
///
/// Holds the disjunctive-graph status: which operations are scheduled, their
/// start times, the oriented machine arcs, and per-operation completion lower
/// bounds. C_LB of a scheduled operation is its completion time; for an
/// unscheduled one it is C_LB(job predecessor) + t, i.e. a pure job-chain
/// bound propagated from the scheduled frontier.
class ScheduleState {
 public:
  explicit ScheduleState(std::shared_ptr<const JsspInstance> instance);

  const JsspInstance& instance() const noexcept { return *instance_; }
  bool job_done(int job) const noexcept { return next_op_[static_cast<std::size_t>(job)] >= instance_->ops_per_job(); }
  bool complete() const noexcept { return scheduled_ == instance_->operation_count(); }
  int next_op(int job) const noexcept { return next_op_[static_cast<std::size_t>(job)]; }
  std::size_t scheduled_count() const noexcept { return scheduled_; }

  /// Appends the next operation of job; returns its start time. Throws
  /// MaskedActionError when the job has no unscheduled operation.
  std::int64_t dispatch(int job);

  std::int64_t earliest_start(int job) const;
  std::int64_t job_ready(int job) const noexcept { return job_ready_[static_cast<std::size_t>(job)]; }
  std::int64_t machine_available(int machine) const noexcept { return machine_avail_[static_cast<std::size_t>(machine)]; }

  /// -1 for unscheduled operations.
  std::int64_t start_time(int job, int index) const noexcept;
  std::int64_t completion_lower_bound(int job, int index) const noexcept;
  /// H(s) = max over operations of C_LB.
  std::int64_t lower_bound() const noexcept;
  /// Max completion over scheduled operations (0 when empty).
  std::int64_t current_makespan() const noexcept;

  /// Oriented disjunctive arcs: consecutive (job, op) pairs per machine sequence.
  std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> oriented_arcs() const;
  const std::vector<std::vector<std::pair<int, int>>>& machine_sequences() const noexcept { return machine_seq_; }
  ActionMask action_mask() const;
  std::vector<std::vector<std::int64_t>> start_times() const { return start_; }

 private:
  std::shared_ptr<const JsspInstance> instance_;
  std::vector<int> next_op_;
  std::vector<std::int64_t> job_ready_;
  std::vector<std::int64_t> machine_avail_;
  std::vector<std::vector<std::int64_t>> start_;
  std::vector<std::vector<std::pair<int, int>>> machine_seq_;
  std::size_t scheduled_ = 0;
};

struct ScheduleResult {
  std::vector<std::vector<std::int64_t>> start_times;
  std::int64_t makespan = 0;
  std::vector<int> dispatch_order;
};

/// C_max = max(ST + t) recomputed from start times; throws ContractError if
/// the schedule violates job precedence or overlaps on a machine.
std::int64_t verify_schedule(const JsspInstance& instance, const std::vector<std::vector<std::int64_t>>& start_times);

/// Replays a dispatch order (job ids) under append semantics.
ScheduleResult schedule_from_order(const JsspInstance& instance, const std::vector<int>& order);

inline constexpr std::size_t kBruteForceMaxOperations = 12;

/// Minimum-makespan dispatch order over every precedence-respecting order,
/// with the same append semantics as ScheduleState. Throws ConfigError above
/// kBruteForceMaxOperations operations.
ScheduleResult brute_force_optimal(const JsspInstance& instance);

enum class DispatchRule { kSpt, kLpt, kMwr, kFifo };

const char* to_string(DispatchRule rule) noexcept;

/// Dispatches, at each step, the eligible operation with the highest priority;
/// ties go to the lowest job id.
ScheduleResult classic_pdr(const JsspInstance& instance, DispatchRule rule);

struct JsspEnvOptions {
  int jobs = 6;
  int machines = 6;
  std::int64_t time_low = 1;
  std::int64_t time_high = 99;
};

/// PDR environment. Actions are job ids; reward is H(s_t) - H(s_{t+1}).
/// Observation: (J*M) x 2 matrix, row-major by (job, op), columns
/// [C_LB / H(s_0), scheduled flag].
class JsspEnv final : public Environment {
 public:
  /// Draws a fresh Taillard instance at every reset from the reset seed.
  explicit JsspEnv(JsspEnvOptions options);
  /// Always schedules the given instance.
  explicit JsspEnv(JsspInstance fixed_instance);

  std::size_t action_count() const override { return static_cast<std::size_t>(options_.jobs); }
  ObservationShape observation_shape() const override {
    return {static_cast<std::size_t>(options_.jobs * options_.machines), 2};
  }
  Observation reset(std::uint64_t seed = 0) override;
  StepResult step(int action) override;
  Observation observe() const override;
  bool done() const override { return state_->complete(); }
  ActionMask action_mask() const override { return state_->action_mask(); }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<JsspEnv>(*this); }

  const ScheduleState& state() const { return *state_; }
  std::int64_t initial_lower_bound() const noexcept { return initial_bound_; }
  std::int64_t makespan() const noexcept { return state_->current_makespan(); }
  const JsspInstance& instance() const { return state_->instance(); }

 private:
  JsspEnvOptions options_;
  std::optional<JsspInstance> fixed_;
  std::optional<ScheduleState> state_;
  std::int64_t initial_bound_ = 0;
};

}  // namespace genrl::env
