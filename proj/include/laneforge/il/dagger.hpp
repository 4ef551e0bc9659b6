#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "laneforge/expert/pure_pursuit.hpp"
#include "laneforge/il/dataset.hpp"
#include "laneforge/il/train_bc.hpp"
#include "laneforge/sim/environment.hpp"

namespace laneforge {

struct DaggerOptions {
  int iterations = 4;
  int episodes_per_iter = 32;
  int steps_per_episode = 512;
  bool domain_rand = false;
  uint64_t seed = 0;
  uint64_t split_seed = 0;
  PurePursuitConfig expert;
  TrainConfig train;
};

// One relabeled visit: the learner's state, the expert memory it was labeled
// with, and the stored label.
struct DaggerVisit {
  RobotState state;
  ExpertState memory;
  Action label;
  int map_index = 0;
};

struct DaggerReport {
  std::vector<TrainReport> rounds;   // round 0 trains on the initial data
  std::vector<size_t> dataset_sizes; // after each round's aggregation
  const TrainReport& final() const { return rounds.back(); }
};

struct DaggerHooks {
  std::function<void(int round, const EpochLoss&)> on_epoch;
  std::vector<DaggerVisit>* visits = nullptr;
};

// Rolls the current policy out for episodes_per_iter x steps_per_episode
// steps and appends each visited observation labeled with the expert's
// action (beta = 0). If the learner leaves the road the environment is reset
// and collection continues, so every episode contributes exactly
// steps_per_episode records.
void CollectDaggerRound(Environment& env, nn::PolicyNet<float>& net, const DaggerOptions& options,
                        int round, Dataset& data, std::vector<DaggerVisit>* visits = nullptr);

// Trains BC on `data`, then for each iteration aggregates a relabeled round
// and retrains, starting from the previous round's weights, on everything
// collected so far.
DaggerReport TrainDagger(Environment& env, Dataset& data, nn::PolicyNet<float>& net,
                         const DaggerOptions& options, const DaggerHooks& hooks = {});

}  // namespace laneforge
