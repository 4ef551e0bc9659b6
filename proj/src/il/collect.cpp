#include "laneforge/il/collect.hpp"

#include "laneforge/errors.hpp"
#include "laneforge/sim/seed.hpp"

namespace laneforge {

void CollectDemonstrations(Environment& env, const CollectOptions& options, DemoSink& sink) {
  options.expert.Validate();
  if (options.episodes < 0 || options.steps_per_episode < 0) {
    throw ConfigError("episodes and steps_per_episode must be non-negative");
  }
  struct RestoreLimit {
    Environment& env;
    int steps;
    ~RestoreLimit() { env.set_max_steps(steps); }
  } restore{env, env.max_steps()};
  env.set_max_steps(options.steps_per_episode);
  for (int e = 0; e < options.episodes; ++e) {
    ResetOptions reset;
    reset.domain_rand = options.domain_rand;
    reset.seed = DeriveSeed(options.seed, static_cast<uint64_t>(e));
    env.Reset(reset);
    ExpertState memory;
    for (int k = 0; k < options.steps_per_episode; ++k) {
      ExpertDecision decision;
      try {
        decision = ExpertAction(env.state(), env.track(), options.expert, memory);
      } catch (const OffRoad& err) {
        throw ExpertFailure(std::string("expert lost the road: ") + err.what());
      }
      memory = decision.state;
      if (sink.wants_observations()) {
        const Observation obs = Observe(env);
        sink.Add(&obs, decision.action);
      } else {
        sink.Add(nullptr, decision.action);
      }
      const StepResult r = env.Step(decision.action);
      if (r.done_reason == DoneReason::kOffRoad) {
        throw ExpertFailure("expert drove off-road in episode " + std::to_string(e) +
                            " at step " + std::to_string(k + 1) + " on " + env.track().name());
      }
    }
  }
}

Dataset CollectDemonstrations(Environment& env, const CollectOptions& options) {
  Dataset ds;
  ds.Reserve(static_cast<size_t>(options.episodes) * options.steps_per_episode);
  CollectDemonstrations(env, options, ds);
  for (const auto& m : env.maps()) ds.info().maps.push_back(m->name());
  ds.info().domain_rand = options.domain_rand;
  ds.info().seed = options.seed;
  ds.info().episodes = options.episodes;
  ds.info().steps_per_episode = options.steps_per_episode;
  return ds;
}

}  // namespace laneforge
