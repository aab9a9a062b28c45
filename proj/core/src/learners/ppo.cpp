#include "genrl/learners/ppo.hpp"

#include <string>

#include "genrl/errors.hpp"

namespace genrl::learners {

void PpoConfig::validate() const {
  if (!(clip > 0.0)) throw ConfigError("ppo: clip must be positive");
  if (epochs < 1) throw ConfigError("ppo: epochs must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("ppo: gamma must lie in [0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("ppo: gae_lambda must lie in [0, 1]");
  if (!(value_coef >= 0.0) || !(entropy_coef >= 0.0)) throw ConfigError("ppo: coefficients must be >= 0");
}

int default_ppo_epochs(std::string_view env) {
  if (env == "blockmaze" || env == "jssp") return 15;
  if (env == "pacgrid") return 3;
  throw ConfigError("ppo: no default epoch count for environment '" + std::string(env) + "'");
}

std::vector<double> gae(std::span<const double> rewards, std::span<const double> values, double gamma,
                        double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n + 1) throw ShapeError("gae: need n + 1 values");
  std::vector<double> adv(n);
  double carry = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double delta = rewards[t] + gamma * values[t + 1] - values[t];
    carry = delta + gamma * lambda * carry;
    adv[t] = carry;
  }
  return adv;
}

}  // namespace genrl::learners
