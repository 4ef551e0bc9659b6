#include "laneforge/il/gail.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "laneforge/errors.hpp"
#include "laneforge/il/train_bc.hpp"
#include "laneforge/nn/inference.hpp"
#include "laneforge/nn/losses.hpp"
#include "laneforge/sim/seed.hpp"

namespace laneforge {

using nn::Mat;

void Trajectory::Add(const Observation& o, std::array<float, 2> u, const Action& a) {
  obs.insert(obs.end(), o.values.begin(), o.values.end());
  pre_squash.push_back(u);
  actions.push_back(a);
}

ReplayBuffer::ReplayBuffer(int capacity, int max_length)
    : capacity_(capacity), max_length_(max_length) {
  if (capacity <= 0 || max_length <= 0) throw ConfigError("buffer capacity must be positive");
}

void ReplayBuffer::Push(Trajectory t) {
  if (t.size() > static_cast<size_t>(max_length_)) {
    throw ConfigError("trajectory of " + std::to_string(t.size()) + " steps exceeds " +
                      std::to_string(max_length_));
  }
  ++offered_;
  pairs_ += t.size();
  items_.push_back(std::move(t));
  while (items_.size() > static_cast<size_t>(capacity_)) {
    pairs_ -= items_.front().size();
    items_.pop_front();
    ++evicted_;
  }
}

std::pair<const Trajectory*, size_t> ReplayBuffer::pair_at(size_t k) const {
  for (const Trajectory& t : items_) {
    if (k < t.size()) return {&t, k};
    k -= t.size();
  }
  throw BufferUnderflow("pair index past the end of the buffer");
}

void GailOptions::Validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw ConfigError(std::string(name) + " must be positive, got " + std::to_string(v));
  };
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  positive(rollouts_per_epoch, "rollouts_per_epoch");
  positive(rollout_len, "rollout_len");
  if (disc_passes < 0) throw ConfigError("disc_passes must be >= 0");
  if (policy_passes < 0) throw ConfigError("policy_passes must be >= 0");
  positive(batch, "batch");
  if (!(reward_clip > 0)) throw ConfigError("reward_clip must be positive");
  if (!(baseline_rate > 0 && baseline_rate <= 1)) throw ConfigError("baseline_rate must lie in (0, 1]");
}

double GailReward(double logit, double clip) {
  return std::clamp(nn::Softplus(logit), 0.0, clip);
}

namespace {

void PackPair(const float* obs, const Action& a, Mat<float>& x, Mat<float>& act, Eigen::Index row) {
  nn::PackObservation(obs, x.row(row).data());
  act(row, 0) = static_cast<float>(a.throttle());
  act(row, 1) = static_cast<float>(a.steering());
}

std::vector<std::pair<const Trajectory*, size_t>> Flatten(
    const std::vector<const Trajectory*>& rollouts) {
  std::vector<std::pair<const Trajectory*, size_t>> out;
  for (const Trajectory* t : rollouts) {
    for (size_t i = 0; i < t->size(); ++i) out.emplace_back(t, i);
  }
  return out;
}

}  // namespace

DiscStats UpdateDiscriminator(nn::Discriminator<float>& disc, nn::Adam<float>& opt,
                              const Dataset& expert, const ReplayBuffer& buffer, int updates,
                              int batch, std::mt19937_64& rng) {
  if (buffer.empty() || buffer.pairs() == 0) throw BufferUnderflow("discriminator update with an empty buffer");
  const std::vector<size_t>& pool = expert.has_split() ? expert.train() : std::vector<size_t>{};
  const size_t expert_n = expert.has_split() ? pool.size() : expert.size();
  if (expert_n == 0) throw TooFewRecords("no expert records for the discriminator");
  const nn::ParamList<float> params = disc.Parameters();
  Mat<float> x(2 * batch, kObsSize), act(2 * batch, 2), labels(2 * batch, 1);
  DiscStats stats;
  for (int u = 0; u < updates; ++u) {
    for (int i = 0; i < batch; ++i) {
      size_t e = static_cast<size_t>(rng() % expert_n);
      if (expert.has_split()) e = pool[e];
      PackPair(expert.obs(e), expert.action(e), x, act, i);
      labels(i, 0) = 1.0f;
      auto [t, k] = buffer.pair_at(static_cast<size_t>(rng() % buffer.pairs()));
      PackPair(t->obs_at(k), t->actions[k], x, act, batch + i);
      labels(batch + i, 0) = 0.0f;
    }
    disc.ZeroGrad();
    const Mat<float>& logits = disc.Forward(x, act);
    int correct = 0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) correct += (logits(i, 0) > 0) == (labels(i, 0) > 0.5f);
    nn::LossGrad<float> lg = nn::BceWithLogits(logits, labels);
    disc.Backward(lg.dz);
    nn::CheckGradients(params);
    opt.Step(params);
    stats.loss = lg.loss;
    stats.accuracy = static_cast<double>(correct) / static_cast<double>(2 * batch);
  }
  CheckParametersFinite(params);
  return stats;
}

double DiscriminatorAccuracy(nn::Discriminator<float>& disc, const Dataset& expert,
                             const std::vector<size_t>& expert_indices,
                             const std::vector<const Trajectory*>& agent) {
  auto classify = [&](auto&& fill, size_t n, bool expert_label) {
    if (n == 0) return 0.0;
    size_t correct = 0;
    constexpr size_t kChunk = 128;
    Mat<float> x, act;
    for (size_t b = 0; b < n; b += kChunk) {
      const size_t e = std::min(n, b + kChunk);
      x.resize(static_cast<Eigen::Index>(e - b), kObsSize);
      act.resize(static_cast<Eigen::Index>(e - b), 2);
      for (size_t i = b; i < e; ++i) fill(i, x, act, static_cast<Eigen::Index>(i - b));
      const Mat<float>& z = disc.Forward(x, act);
      for (Eigen::Index i = 0; i < z.rows(); ++i) correct += (z(i, 0) > 0) == expert_label;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
  };
  const double on_expert = classify(
      [&](size_t i, Mat<float>& x, Mat<float>& a, Eigen::Index row) {
        PackPair(expert.obs(expert_indices[i]), expert.action(expert_indices[i]), x, a, row);
      },
      expert_indices.size(), true);
  const auto pairs = Flatten(agent);
  const double on_agent = classify(
      [&](size_t i, Mat<float>& x, Mat<float>& a, Eigen::Index row) {
        PackPair(pairs[i].first->obs_at(pairs[i].second), pairs[i].first->actions[pairs[i].second], x, a, row);
      },
      pairs.size(), false);
  return 0.5 * (on_expert + on_agent);
}

std::vector<double> ComputeRewards(nn::Discriminator<float>& disc,
                                   const std::vector<const Trajectory*>& rollouts, double clip) {
  std::vector<double> out;
  Mat<float> x, act;
  for (const Trajectory* t : rollouts) {
    if (t->size() == 0) continue;
    x.resize(static_cast<Eigen::Index>(t->size()), kObsSize);
    act.resize(static_cast<Eigen::Index>(t->size()), 2);
    for (size_t i = 0; i < t->size(); ++i) PackPair(t->obs_at(i), t->actions[i], x, act, static_cast<Eigen::Index>(i));
    const Mat<float>& z = disc.Forward(x, act);
    for (Eigen::Index i = 0; i < z.rows(); ++i) out.push_back(GailReward(z(i, 0), clip));
  }
  return out;
}

double UpdatePolicy(nn::PolicyNet<float>& policy, nn::Adam<float>& opt,
                    const std::vector<const Trajectory*>& rollouts,
                    const std::vector<double>& rewards, double& baseline, double baseline_rate,
                    int passes, int batch) {
  const auto pairs = Flatten(rollouts);
  if (pairs.empty()) throw BufferUnderflow("policy update before any rollout");
  if (rewards.size() != pairs.size()) throw ShapeMismatch("one reward per rollout pair required");

  // Advantage against the scalar baseline, then standardized.
  const double n = static_cast<double>(pairs.size());
  std::vector<double> adv(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) adv[i] = rewards[i] - baseline;
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / n);
  for (double& a : adv) a = sd > 1e-8 ? (a - mean) / sd : a - mean;
  const double mean_reward = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  baseline += baseline_rate * (mean_reward - baseline);

  // Each pass is a single step on the gradient over every pair. Chunks of
  // `batch` only bound memory. Many small noisy steps let Adam's per-weight
  // normalization drag the means off with no reward signal behind it.
  const nn::ParamList<float> params = policy.Parameters();
  Mat<float> x, dz;
  double last_loss = 0.0;
  for (int pass = 0; pass < passes; ++pass) {
    policy.ZeroGrad();
    const double log_std[2] = {policy.log_std().value[0], policy.log_std().value[1]};
    double d_log_std[2] = {0.0, 0.0};
    double loss = 0.0;
    for (size_t b = 0; b < pairs.size(); b += static_cast<size_t>(batch)) {
      const size_t e = std::min(pairs.size(), b + static_cast<size_t>(batch));
      const auto m = static_cast<Eigen::Index>(e - b);
      x.resize(m, kObsSize);
      for (Eigen::Index r = 0; r < m; ++r) {
        const auto& [t, k] = pairs[b + static_cast<size_t>(r)];
        nn::PackObservation(t->obs_at(k), x.row(r).data());
      }
      const Mat<float>& z = policy.Forward(x);
      dz.resize(m, 2);
      for (Eigen::Index r = 0; r < m; ++r) {
        const auto& [t, k] = pairs[b + static_cast<size_t>(r)];
        const double a = adv[b + static_cast<size_t>(r)];
        const double u[2] = {t->pre_squash[k][0], t->pre_squash[k][1]};
        const double mu[2] = {z(r, 0), z(r, 1)};
        loss -= a * nn::GaussianLogProb(u, mu, log_std, 2) / n;
        for (int c = 0; c < 2; ++c) {
          double dm, dl;
          nn::GaussianLogProbGrad(u[c], mu[c], log_std[c], &dm, &dl);
          dz(r, c) = static_cast<float>(-a * dm / n);
          d_log_std[c] -= a * dl / n;
        }
      }
      policy.Backward(dz);
    }
    for (int c = 0; c < 2; ++c) policy.log_std().grad[c] = static_cast<float>(d_log_std[c]);
    nn::CheckGradients(params);
    opt.Step(params);
    last_loss = loss;
  }
  CheckParametersFinite(params);
  return last_loss;
}

Trajectory Rollout(Environment& env, nn::PolicyNet<float>& policy, int length,
                   const ResetOptions& reset, std::mt19937_64& noise) {
  struct RestoreLimit {
    Environment& env;
    int steps;
    ~RestoreLimit() { env.set_max_steps(steps); }
  } restore{env, env.max_steps()};
  env.set_max_steps(length);
  env.Reset(reset);
  Trajectory t;
  t.obs.reserve(static_cast<size_t>(length) * kObsSize);
  std::normal_distribution<double> gauss(0.0, 1.0);
  bool done = length <= 0;
  while (!done) {
    const Observation obs = Observe(env);
    const nn::GaussianHead g = nn::ForwardPolicyStochastic(policy, obs);
    std::array<float, 2> u;
    for (int c = 0; c < 2; ++c) u[c] = static_cast<float>(g.mean[c] + std::exp(g.log_std[c]) * gauss(noise));
    const Action a = nn::SquashAction(u[0], u[1]);
    t.Add(obs, u, a);
    done = env.Step(a).done;
  }
  return t;
}

GailReport TrainGail(Environment& env, const Dataset& expert, nn::PolicyNet<float>& policy,
                     nn::Discriminator<float>& disc, ReplayBuffer& buffer,
                     const GailOptions& options, const GailCallback& on_epoch) {
  options.Validate();
  if (expert.size() == 0) throw TooFewRecords("GAIL needs expert demonstrations");
  nn::Adam<float> policy_opt(options.policy_adam);
  nn::Adam<float> disc_opt(options.disc_adam);
  std::mt19937_64 rng(DeriveSeed(options.seed, 0x6a11));
  double baseline = 0.0;
  GailReport report;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    std::vector<Trajectory> fresh;
    for (int r = 0; r < options.rollouts_per_epoch; ++r) {
      ResetOptions reset;
      reset.domain_rand = options.domain_rand;
      reset.seed = DeriveSeed(DeriveSeed(options.seed, static_cast<uint64_t>(epoch)), static_cast<uint64_t>(r));
      fresh.push_back(Rollout(env, policy, options.rollout_len, reset, rng));
    }
    size_t fresh_pairs = 0;
    for (const Trajectory& t : fresh) fresh_pairs += t.size();
    for (const Trajectory& t : fresh) buffer.Push(t);

    GailEpoch log;
    log.epoch = epoch;
    // One disc pass = as many minibatches as fresh pairs / batch.
    const int per_pass = static_cast<int>((fresh_pairs + options.batch - 1) / options.batch);
    if (options.disc_passes > 0) {
      DiscStats ds = UpdateDiscriminator(disc, disc_opt, expert, buffer,
                                         options.disc_passes * per_pass, options.batch, rng);
      log.disc_loss = ds.loss;
      log.disc_accuracy = ds.accuracy;
    }
    std::vector<const Trajectory*> views;
    for (const Trajectory& t : fresh) views.push_back(&t);
    const std::vector<double> rewards = ComputeRewards(disc, views, options.reward_clip);
    log.mean_reward = rewards.empty() ? 0.0 : std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
    if (options.policy_passes > 0) {
      log.policy_loss = UpdatePolicy(policy, policy_opt, views, rewards, baseline,
                                     options.baseline_rate, options.policy_passes, options.batch);
    }
    log.baseline = baseline;
    log.buffer_trajectories = buffer.trajectories();
    log.buffer_pairs = buffer.pairs();
    report.history.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  return report;
}

}  // namespace laneforge
