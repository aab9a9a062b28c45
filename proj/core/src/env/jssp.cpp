#include "genrl/env/jssp.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "genrl/errors.hpp"

namespace genrl::env {

JsspInstance::JsspInstance(int machines, std::vector<std::vector<Operation>> jobs)
    : machines_(machines), jobs_(std::move(jobs)) {
  if (machines_ < 1 || jobs_.empty()) throw ConfigError("jssp: need at least one job and one machine");
  for (const auto& job : jobs_) {
    if (static_cast<int>(job.size()) != machines_) {
      throw ConfigError("jssp: every job must have exactly one operation per machine");
    }
    std::vector<char> seen(static_cast<std::size_t>(machines_), 0);
    for (const auto& op : job) {
      if (op.machine < 0 || op.machine >= machines_) throw ConfigError("jssp: machine id out of range");
      if (seen[static_cast<std::size_t>(op.machine)]++) throw ConfigError("jssp: job visits a machine twice");
      if (op.time < 1) throw ConfigError("jssp: processing times must be >= 1");
    }
  }
}

std::int64_t JsspInstance::total_time() const noexcept {
  std::int64_t t = 0;
  for (const auto& job : jobs_)
    for (const auto& op : job) t += op.time;
  return t;
}

JsspInstance generate_taillard(int jobs, int machines, std::int64_t time_low, std::int64_t time_high,
                               std::uint64_t seed) {
  if (jobs < 1 || machines < 1) throw ConfigError("generate_taillard: jobs and machines must be >= 1");
  if (time_low < 1 || time_low > time_high) throw ConfigError("generate_taillard: need 1 <= time_low <= time_high");
  Rng rng(seed, 0x7461696c6c617264);
  std::vector<std::vector<Operation>> out(static_cast<std::size_t>(jobs));
  for (auto& job : out) {
    std::vector<int> route(static_cast<std::size_t>(machines));
    std::iota(route.begin(), route.end(), 0);
    for (std::size_t i = route.size(); i > 1; --i) std::swap(route[i - 1], route[rng.below(i)]);
    for (int m : route) job.push_back({m, rng.uniform_int(time_low, time_high)});
  }
  return JsspInstance(machines, std::move(out));
}

JsspInstance parse_instance(std::string_view text) {
  std::istringstream in{std::string(text)};
  int jobs = 0, machines = 0;
  if (!(in >> jobs >> machines) || jobs < 1 || machines < 1) throw ParseError("jssp: bad header");
  std::vector<std::vector<Operation>> ops(static_cast<std::size_t>(jobs));
  for (auto& job : ops) {
    for (int k = 0; k < machines; ++k) {
      Operation op;
      if (!(in >> op.machine >> op.time)) throw ParseError("jssp: truncated operation list");
      job.push_back(op);
    }
  }
  std::string rest;
  if (in >> rest) throw ParseError("jssp: trailing data '" + rest + "'");
  try {
    return JsspInstance(machines, std::move(ops));
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
}

std::string format_instance(const JsspInstance& instance) {
  std::string out = std::to_string(instance.job_count()) + " " + std::to_string(instance.machine_count()) + "\n";
  for (const auto& job : instance.jobs()) {
    for (std::size_t k = 0; k < job.size(); ++k) {
      if (k) out += ' ';
      out += std::to_string(job[k].machine) + " " + std::to_string(job[k].time);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

ScheduleState::ScheduleState(std::shared_ptr<const JsspInstance> instance) : instance_(std::move(instance)) {
  const auto J = static_cast<std::size_t>(instance_->job_count());
  const auto M = static_cast<std::size_t>(instance_->machine_count());
  next_op_.assign(J, 0);
  job_ready_.assign(J, 0);
  machine_avail_.assign(M, 0);
  start_.assign(J, std::vector<std::int64_t>(static_cast<std::size_t>(instance_->ops_per_job()), -1));
  machine_seq_.assign(M, {});
}

std::int64_t ScheduleState::earliest_start(int job) const {
  const Operation& op = instance_->op(job, next_op(job));
  return std::max(job_ready(job), machine_available(op.machine));
}

std::int64_t ScheduleState::dispatch(int job) {
  if (job < 0 || job >= instance_->job_count()) throw std::out_of_range("jssp: job " + std::to_string(job));
  if (job_done(job)) throw MaskedActionError("jssp: job " + std::to_string(job) + " has no operation left");
  const auto j = static_cast<std::size_t>(job);
  const int k = next_op_[j];
  const Operation& op = instance_->op(job, k);
  const std::int64_t start = earliest_start(job);
  start_[j][static_cast<std::size_t>(k)] = start;
  job_ready_[j] = start + op.time;
  machine_avail_[static_cast<std::size_t>(op.machine)] = start + op.time;
  machine_seq_[static_cast<std::size_t>(op.machine)].emplace_back(job, k);
  ++next_op_[j];
  ++scheduled_;
  return start;
}

std::int64_t ScheduleState::start_time(int job, int index) const noexcept {
  return start_[static_cast<std::size_t>(job)][static_cast<std::size_t>(index)];
}

std::int64_t ScheduleState::completion_lower_bound(int job, int index) const noexcept {
  const std::int64_t st = start_time(job, index);
  if (st >= 0) return st + instance_->op(job, index).time;
  std::int64_t acc = job_ready(job);
  for (int k = next_op(job); k <= index; ++k) acc += instance_->op(job, k).time;
  return acc;
}

std::int64_t ScheduleState::lower_bound() const noexcept {
  std::int64_t h = 0;
  for (int j = 0; j < instance_->job_count(); ++j) {
    std::int64_t acc = job_ready(j);
    for (int k = next_op(j); k < instance_->ops_per_job(); ++k) acc += instance_->op(j, k).time;
    h = std::max(h, acc);
  }
  return h;
}

std::int64_t ScheduleState::current_makespan() const noexcept {
  return machine_avail_.empty() ? 0 : *std::max_element(machine_avail_.begin(), machine_avail_.end());
}

std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> ScheduleState::oriented_arcs() const {
  std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> arcs;
  for (const auto& seq : machine_seq_)
    for (std::size_t i = 1; i < seq.size(); ++i) arcs.emplace_back(seq[i - 1], seq[i]);
  return arcs;
}

ActionMask ScheduleState::action_mask() const {
  ActionMask mask(static_cast<std::size_t>(instance_->job_count()));
  for (int j = 0; j < instance_->job_count(); ++j) mask[static_cast<std::size_t>(j)] = job_done(j) ? 0 : 1;
  return mask;
}

// ---------------------------------------------------------------------------

std::int64_t verify_schedule(const JsspInstance& instance, const std::vector<std::vector<std::int64_t>>& start_times) {
  if (start_times.size() != static_cast<std::size_t>(instance.job_count())) {
    throw ContractError("schedule: wrong job count");
  }
  std::int64_t cmax = 0;
  std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> per_machine(
      static_cast<std::size_t>(instance.machine_count()));
  for (int j = 0; j < instance.job_count(); ++j) {
    const auto& row = start_times[static_cast<std::size_t>(j)];
    if (row.size() != static_cast<std::size_t>(instance.ops_per_job())) throw ContractError("schedule: wrong op count");
    for (int k = 0; k < instance.ops_per_job(); ++k) {
      const Operation& op = instance.op(j, k);
      const std::int64_t st = row[static_cast<std::size_t>(k)];
      if (st < 0) throw ContractError("schedule: unscheduled operation");
      if (k > 0 && st < row[static_cast<std::size_t>(k - 1)] + instance.op(j, k - 1).time) {
        throw ContractError("schedule: job precedence violated");
      }
      per_machine[static_cast<std::size_t>(op.machine)].emplace_back(st, st + op.time);
      cmax = std::max(cmax, st + op.time);
    }
  }
  for (auto& intervals : per_machine) {
    std::sort(intervals.begin(), intervals.end());
    for (std::size_t i = 1; i < intervals.size(); ++i) {
      if (intervals[i].first < intervals[i - 1].second) throw ContractError("schedule: machine overlap");
    }
  }
  return cmax;
}

ScheduleResult schedule_from_order(const JsspInstance& instance, const std::vector<int>& order) {
  ScheduleState s(std::make_shared<const JsspInstance>(instance));
  for (int j : order) s.dispatch(j);
  if (!s.complete()) throw ContractError("schedule: dispatch order does not schedule every operation");
  return {s.start_times(), s.current_makespan(), order};
}

namespace {

// Depth-first search over dispatch orders with two cuts that keep it exact:
// a node is dropped when an admissible lower bound cannot beat the incumbent,
// and when its state was already expanded (a state's best completion does not
// depend on the path to it, and the incumbent only improves over time).
// State key: [next_op..., job_ready..., machine_avail...], with the ready time
// of finished jobs zeroed.
class ExactSolver {
 public:
  explicit ExactSolver(const JsspInstance& inst) : inst_(inst), J_(inst.job_count()), M_(inst.machine_count()) {
    for (auto rule : {DispatchRule::kSpt, DispatchRule::kLpt, DispatchRule::kMwr, DispatchRule::kFifo}) {
      auto r = classic_pdr(inst, rule);
      if (r.makespan < best_) {
        best_ = r.makespan;
        best_order_ = std::move(r.dispatch_order);
      }
    }
  }

  std::vector<int> solve() {
    std::vector<std::int64_t> key(static_cast<std::size_t>(2 * J_ + M_), 0);
    std::vector<int> order;
    search(key, order);
    return best_order_;
  }

 private:
  std::int64_t lower_bound(const std::vector<std::int64_t>& key) const {
    std::int64_t lb = *std::max_element(key.begin() + 2 * J_, key.end());
    std::vector<std::int64_t> machine_work(static_cast<std::size_t>(M_), 0);
    for (int j = 0; j < J_; ++j) {
      const int k0 = static_cast<int>(key[static_cast<std::size_t>(j)]);
      if (k0 >= M_) continue;
      std::int64_t t = std::max(key[static_cast<std::size_t>(J_ + j)],
                                key[static_cast<std::size_t>(2 * J_ + inst_.op(j, k0).machine)]);
      for (int k = k0; k < M_; ++k) {
        t += inst_.op(j, k).time;
        machine_work[static_cast<std::size_t>(inst_.op(j, k).machine)] += inst_.op(j, k).time;
      }
      lb = std::max(lb, t);
    }
    for (int m = 0; m < M_; ++m) {
      lb = std::max(lb, key[static_cast<std::size_t>(2 * J_ + m)] + machine_work[static_cast<std::size_t>(m)]);
    }
    return lb;
  }

  void search(std::vector<std::int64_t>& key, std::vector<int>& order) {
    if (order.size() == inst_.operation_count()) {
      const std::int64_t cmax = *std::max_element(key.begin() + 2 * J_, key.end());
      if (cmax < best_) {
        best_ = cmax;
        best_order_ = order;
      }
      return;
    }
    if (lower_bound(key) >= best_) return;
    if (!seen_.insert(key).second) return;
    for (int j = 0; j < J_; ++j) {
      const int k = static_cast<int>(key[static_cast<std::size_t>(j)]);
      if (k >= M_) continue;
      const Operation& op = inst_.op(j, k);
      auto& ready = key[static_cast<std::size_t>(J_ + j)];
      auto& avail = key[static_cast<std::size_t>(2 * J_ + op.machine)];
      const std::int64_t saved_ready = ready, saved_avail = avail;
      const std::int64_t end = std::max(ready, avail) + op.time;
      ready = k + 1 == M_ ? 0 : end;
      avail = end;
      ++key[static_cast<std::size_t>(j)];
      order.push_back(j);
      search(key, order);
      order.pop_back();
      --key[static_cast<std::size_t>(j)];
      ready = saved_ready;
      avail = saved_avail;
    }
  }

  const JsspInstance& inst_;
  int J_, M_;
  std::int64_t best_ = std::numeric_limits<std::int64_t>::max();
  std::vector<int> best_order_;
  std::set<std::vector<std::int64_t>> seen_;
};

}  // namespace

ScheduleResult brute_force_optimal(const JsspInstance& instance) {
  if (instance.operation_count() > kBruteForceMaxOperations) {
    throw ConfigError("brute_force_optimal: " + std::to_string(instance.operation_count()) +
                      " operations exceeds the limit of " + std::to_string(kBruteForceMaxOperations));
  }
  return schedule_from_order(instance, ExactSolver(instance).solve());
}

const char* to_string(DispatchRule rule) noexcept {
  switch (rule) {
    case DispatchRule::kSpt: return "SPT";
    case DispatchRule::kLpt: return "LPT";
    case DispatchRule::kMwr: return "MWR";
    case DispatchRule::kFifo: return "FIFO";
  }
  return "?";
}

ScheduleResult classic_pdr(const JsspInstance& instance, DispatchRule rule) {
  ScheduleState s(std::make_shared<const JsspInstance>(instance));
  std::vector<int> order;
  while (!s.complete()) {
    int best = -1;
    std::int64_t best_priority = 0;
    for (int j = 0; j < instance.job_count(); ++j) {
      if (s.job_done(j)) continue;
      const std::int64_t t = instance.op(j, s.next_op(j)).time;
      std::int64_t priority = 0;
      switch (rule) {
        case DispatchRule::kSpt: priority = -t; break;
        case DispatchRule::kLpt: priority = t; break;
        case DispatchRule::kMwr:
          for (int k = s.next_op(j); k < instance.ops_per_job(); ++k) priority += instance.op(j, k).time;
          break;
        case DispatchRule::kFifo: priority = -s.job_ready(j); break;
      }
      if (best < 0 || priority > best_priority) {
        best = j;
        best_priority = priority;
      }
    }
    s.dispatch(best);
    order.push_back(best);
  }
  return {s.start_times(), s.current_makespan(), std::move(order)};
}

// ---------------------------------------------------------------------------

JsspEnv::JsspEnv(JsspEnvOptions options) : options_(options) {
  if (options_.jobs < 1 || options_.machines < 1) throw ConfigError("jssp env: jobs and machines must be >= 1");
  if (options_.time_low < 1 || options_.time_low > options_.time_high) {
    throw ConfigError("jssp env: need 1 <= time_low <= time_high");
  }
  reset(0);
}

JsspEnv::JsspEnv(JsspInstance fixed_instance) : fixed_(std::move(fixed_instance)) {
  options_.jobs = fixed_->job_count();
  options_.machines = fixed_->machine_count();
  reset(0);
}

Observation JsspEnv::reset(std::uint64_t seed) {
  auto inst = fixed_ ? std::make_shared<const JsspInstance>(*fixed_)
                     : std::make_shared<const JsspInstance>(generate_taillard(
                           options_.jobs, options_.machines, options_.time_low, options_.time_high, seed));
  state_.emplace(std::move(inst));
  initial_bound_ = state_->lower_bound();
  return observe();
}

Observation JsspEnv::observe() const {
  const auto& inst = state_->instance();
  const double norm = static_cast<double>(std::max<std::int64_t>(initial_bound_, 1));
  std::vector<double> v;
  v.reserve(inst.operation_count() * 2);
  for (int j = 0; j < inst.job_count(); ++j) {
    for (int k = 0; k < inst.ops_per_job(); ++k) {
      v.push_back(static_cast<double>(state_->completion_lower_bound(j, k)) / norm);
      v.push_back(state_->start_time(j, k) >= 0 ? 1.0 : 0.0);
    }
  }
  return Observation(inst.operation_count(), 2, std::move(v));
}

StepResult JsspEnv::step(int action) {
  if (state_->complete()) throw StateError("jssp env: step after episode end");
  const std::int64_t before = state_->lower_bound();
  state_->dispatch(action);
  const std::int64_t after = state_->lower_bound();
  StepResult out;
  out.reward = static_cast<double>(before - after);
  out.done = state_->complete();
  out.observation = observe();
  return out;
}

}  // namespace genrl::env
