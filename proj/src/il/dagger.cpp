#include "laneforge/il/dagger.hpp"

#include "laneforge/errors.hpp"
#include "laneforge/nn/inference.hpp"
#include "laneforge/sim/seed.hpp"

namespace laneforge {

void CollectDaggerRound(Environment& env, nn::PolicyNet<float>& net, const DaggerOptions& options,
                        int round, Dataset& data, std::vector<DaggerVisit>* visits) {
  struct RestoreLimit {
    Environment& env;
    int steps;
    ~RestoreLimit() { env.set_max_steps(steps); }
  } restore{env, env.max_steps()};
  env.set_max_steps(options.steps_per_episode);

  const uint64_t round_seed = DeriveSeed(options.seed, static_cast<uint64_t>(round));
  for (int e = 0; e < options.episodes_per_iter; ++e) {
    const uint64_t episode_seed = DeriveSeed(round_seed, static_cast<uint64_t>(e));
    uint64_t resets = 0;
    auto reset = [&] {
      ResetOptions r;
      r.domain_rand = options.domain_rand;
      r.seed = DeriveSeed(episode_seed, resets++);
      env.Reset(r);
    };
    reset();
    ExpertState memory;
    for (int k = 0; k < options.steps_per_episode; ++k) {
      ExpertDecision label;
      try {
        label = ExpertAction(env.state(), env.track(), options.expert, memory);
      } catch (const OffRoad& err) {
        throw ExpertFailure(std::string("relabeling failed: ") + err.what());
      }
      const Observation obs = Observe(env);
      data.Add(obs, label.action);
      if (visits) visits->push_back({env.state(), memory, data.actions().back(), env.map_index()});
      memory = label.state;

      const StepResult r = env.Step(nn::ForwardPolicy(net, obs));
      if (r.done && k + 1 < options.steps_per_episode) {
        reset();
        memory = {};
      }
    }
  }
}

DaggerReport TrainDagger(Environment& env, Dataset& data, nn::PolicyNet<float>& net,
                         const DaggerOptions& options, const DaggerHooks& hooks) {
  options.expert.Validate();
  options.train.Validate();
  if (options.iterations < 0 || options.episodes_per_iter < 0 || options.steps_per_episode < 0) {
    throw ConfigError("iterations, episodes_per_iter and steps_per_episode must be non-negative");
  }
  DaggerReport report;
  if (!data.has_split()) data.Split(options.split_seed);
  auto train = [&](int round) {
    EpochCallback cb;
    if (hooks.on_epoch) cb = [&](const EpochLoss& e) { hooks.on_epoch(round, e); };
    TrainConfig tc = options.train;
    if (round > 0) tc.seed = DeriveSeed(options.train.seed, static_cast<uint64_t>(round));
    report.rounds.push_back(TrainBc(data, net, tc, cb));
    report.dataset_sizes.push_back(data.size());
  };
  train(0);
  for (int it = 1; it <= options.iterations; ++it) {
    data.Reserve(data.size() +
                 static_cast<size_t>(options.episodes_per_iter) * options.steps_per_episode);
    CollectDaggerRound(env, net, options, it, data, hooks.visits);
    data.Split(DeriveSeed(options.split_seed, static_cast<uint64_t>(it)));
    train(it);
  }
  return report;
}

}  // namespace laneforge
