#include "genrl/runtime/actor_learner.hpp"

#include "genrl/errors.hpp"

namespace genrl::runtime {

void ActorLearnerConfig::validate() const {
  if (actors == 0) throw ConfigError("actor-learner: actors must be >= 1");
  if (segment_length == 0) throw ConfigError("actor-learner: segment_length must be >= 1");
  if (queue_capacity == 0) throw ConfigError("actor-learner: queue_capacity must be >= 1");
  if (batch == 0) throw ConfigError("actor-learner: batch must be >= 1");
  if (synchronous && actors != 1) throw ConfigError("actor-learner: synchronous mode runs exactly one actor");
}

}  // namespace genrl::runtime
