#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <vector>

#include "laneforge/il/dataset.hpp"
#include "laneforge/nn/adam.hpp"
#include "laneforge/nn/networks.hpp"
#include "laneforge/sim/environment.hpp"

namespace laneforge {

// One stochastic policy rollout. `pre_squash` holds the Gaussian sample u
// the action was squashed from.
struct Trajectory {
  std::vector<float> obs;  // HWC, kObsSize per step
  std::vector<std::array<float, 2>> pre_squash;
  std::vector<Action> actions;

  size_t size() const { return actions.size(); }
  const float* obs_at(size_t i) const { return obs.data() + i * kObsSize; }
  void Add(const Observation& o, std::array<float, 2> u, const Action& a);
};

inline constexpr int kBufferTrajectories = 75;
inline constexpr int kTrajectoryLength = 256;

// FIFO of whole trajectories; pushing into a full buffer evicts the oldest.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity = kBufferTrajectories, int max_length = kTrajectoryLength);

  void Push(Trajectory t);
  size_t trajectories() const { return items_.size(); }
  size_t pairs() const { return pairs_; }
  size_t capacity() const { return static_cast<size_t>(capacity_); }
  size_t capacity_pairs() const { return static_cast<size_t>(capacity_) * max_length_; }
  size_t offered() const { return offered_; }
  size_t evicted() const { return evicted_; }
  bool empty() const { return items_.empty(); }
  const Trajectory& at(size_t i) const { return items_[i]; }
  // Pair `k` counting across trajectories oldest first.
  std::pair<const Trajectory*, size_t> pair_at(size_t k) const;

 private:
  int capacity_;
  int max_length_;
  std::deque<Trajectory> items_;
  size_t pairs_ = 0;
  size_t offered_ = 0;
  size_t evicted_ = 0;
};

struct GailOptions {
  int epochs = 30;
  int rollouts_per_epoch = 15;
  int rollout_len = kTrajectoryLength;
  int disc_passes = 4;
  int policy_passes = 4;
  int batch = 32;
  double reward_clip = 10.0;
  double baseline_rate = 0.1;
  nn::AdamConfig policy_adam;
  nn::AdamConfig disc_adam;
  bool domain_rand = false;
  uint64_t seed = 0;

  void Validate() const;
};

struct GailEpoch {
  int epoch = 0;
  double disc_loss = 0.0;
  double disc_accuracy = 0.0;
  double mean_reward = 0.0;
  double policy_loss = 0.0;
  double baseline = 0.0;
  size_t buffer_trajectories = 0;
  size_t buffer_pairs = 0;
};

struct GailReport {
  std::vector<GailEpoch> history;
};

// -log(1 - sigmoid(logit)) = softplus(logit), clamped to [0, clip].
double GailReward(double logit, double clip);

struct DiscStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

// `updates` minibatches, each `batch` agent pairs drawn from the buffer and
// `batch` expert pairs drawn from the expert train split (label 1).
DiscStats UpdateDiscriminator(nn::Discriminator<float>& disc, nn::Adam<float>& opt,
                              const Dataset& expert, const ReplayBuffer& buffer, int updates,
                              int batch, std::mt19937_64& rng);

// Classification accuracy at threshold 0 on expert records (label 1) and
// agent pairs (label 0), weighted equally.
double DiscriminatorAccuracy(nn::Discriminator<float>& disc, const Dataset& expert,
                             const std::vector<size_t>& expert_indices,
                             const std::vector<const Trajectory*>& agent);

// Rewards for every pair of `rollouts` under the current discriminator.
std::vector<double> ComputeRewards(nn::Discriminator<float>& disc,
                                   const std::vector<const Trajectory*>& rollouts, double clip);

// Likelihood-ratio steps on the Gaussian head with advantage r - baseline,
// standardized; moves the baseline toward the mean reward. Each pass is one
// optimizer step on the gradient over all pairs, accumulated `batch` pairs
// at a time. Returns the surrogate loss of the last pass. Throws
// BufferUnderflow without data.
double UpdatePolicy(nn::PolicyNet<float>& policy, nn::Adam<float>& opt,
                    const std::vector<const Trajectory*>& rollouts,
                    const std::vector<double>& rewards, double& baseline, double baseline_rate,
                    int passes, int batch);

// One stochastic rollout of at most `length` steps.
Trajectory Rollout(Environment& env, nn::PolicyNet<float>& policy, int length,
                   const ResetOptions& reset, std::mt19937_64& noise);

using GailCallback = std::function<void(const GailEpoch&)>;

GailReport TrainGail(Environment& env, const Dataset& expert, nn::PolicyNet<float>& policy,
                     nn::Discriminator<float>& disc, ReplayBuffer& buffer,
                     const GailOptions& options, const GailCallback& on_epoch = {});

}  // namespace laneforge
