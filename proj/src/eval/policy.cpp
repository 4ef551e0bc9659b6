#include "laneforge/eval/policy.hpp"

#include "laneforge/errors.hpp"
#include "laneforge/nn/inference.hpp"

namespace laneforge {

Action ExpertPolicy::Act(const Observation*, const Environment& env) {
  ExpertDecision d = ExpertAction(env.state(), env.track(), config_, memory_);
  memory_ = d.state;
  return d.action;
}

Action NetPolicy::Act(const Observation* obs, const Environment&) {
  if (obs == nullptr) throw DimensionMismatch("network policy needs an observation");
  return nn::ForwardPolicy(net_, *obs);
}

}  // namespace laneforge
