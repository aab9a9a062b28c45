#include "genrl/learners/dqn.hpp"

#include "genrl/errors.hpp"

namespace genrl::learners {

void DqnConfig::validate() const {
  if (!(epsilon_end >= 0.0 && epsilon_end <= epsilon_start && epsilon_start <= 1.0)) {
    throw ConfigError("dqn: need 0 <= epsilon_end <= epsilon_start <= 1");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("dqn: gamma must lie in [0, 1]");
  if (target_sync_interval == 0) throw ConfigError("dqn: target_sync_interval must be >= 1");
  if (batch == 0) throw ConfigError("dqn: batch must be >= 1");
  if (!(huber_delta > 0.0)) throw ConfigError("dqn: huber_delta must be positive");
}

double epsilon_at(std::size_t step, const DqnConfig& cfg) {
  if (cfg.decay_horizon == 0 || step >= cfg.decay_horizon) return cfg.epsilon_end;
  const double frac = static_cast<double>(step) / static_cast<double>(cfg.decay_horizon);
  return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start);
}

}  // namespace genrl::learners
