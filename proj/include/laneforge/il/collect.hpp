#pragma once

#include <cstdint>

#include "laneforge/expert/pure_pursuit.hpp"
#include "laneforge/il/dataset.hpp"
#include "laneforge/sim/environment.hpp"

namespace laneforge {

struct CollectOptions {
  int episodes = 16;
  int steps_per_episode = 512;
  bool domain_rand = false;
  uint64_t seed = 0;
  PurePursuitConfig expert;
};

// Rolls the expert out for episodes x steps_per_episode steps, handing every
// (observation seen, action emitted) pair to `sink`. Each episode resets with
// a seed derived from (seed, episode). Throws ExpertFailure if the expert
// leaves the road.
void CollectDemonstrations(Environment& env, const CollectOptions& options, DemoSink& sink);

Dataset CollectDemonstrations(Environment& env, const CollectOptions& options);

}  // namespace laneforge
