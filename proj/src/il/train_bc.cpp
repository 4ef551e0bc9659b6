#include "laneforge/il/train_bc.hpp"

#include <random>

#include "laneforge/errors.hpp"
#include "laneforge/nn/inference.hpp"
#include "laneforge/nn/losses.hpp"
#include "laneforge/sim/seed.hpp"

namespace laneforge {

using nn::Mat;

void TrainConfig::Validate() const {
  if (batch <= 0) throw ConfigError("batch must be positive, got " + std::to_string(batch));
  if (patience < 0) throw ConfigError("patience must be >= 0, got " + std::to_string(patience));
  if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0, got " + std::to_string(max_epochs));
  if (!(adam.lr > 0)) throw ConfigError("lr must be positive");
  if (!(adam.beta1 >= 0 && adam.beta1 < 1)) throw ConfigError("beta1 must lie in [0, 1)");
  if (!(adam.beta2 >= 0 && adam.beta2 < 1)) throw ConfigError("beta2 must lie in [0, 1)");
  if (!(adam.eps > 0)) throw ConfigError("eps must be positive");
}

void PackRecords(const Dataset& ds, const std::vector<size_t>& indices, size_t begin, size_t end,
                 Mat<float>& x, Mat<float>& y) {
  const auto n = static_cast<Eigen::Index>(end - begin);
  x.resize(n, kObsSize);
  y.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const size_t r = indices[begin + static_cast<size_t>(i)];
    nn::PackObservation(ds.obs(r), x.row(i).data());
    y(i, 0) = static_cast<float>(ds.action(r).throttle());
    y(i, 1) = static_cast<float>(ds.action(r).steering());
  }
}

void CheckParametersFinite(const nn::ParamList<float>& params) {
  for (const nn::Param<float>* p : params) {
    if (!p->value.AllFinite()) throw NonFiniteGradient("parameter " + p->name + " became non-finite");
  }
}

double EvaluateLoss(nn::PolicyNet<float>& net, const Dataset& ds,
                    const std::vector<size_t>& indices, int batch) {
  if (indices.empty()) return 0.0;
  double sum = 0.0;
  Mat<float> x, y;
  for (size_t b = 0; b < indices.size(); b += static_cast<size_t>(batch)) {
    const size_t e = std::min(indices.size(), b + static_cast<size_t>(batch));
    PackRecords(ds, indices, b, e, x, y);
    sum += nn::SquashedMse(net.Forward(x), y).loss * static_cast<double>(e - b);
  }
  return sum / static_cast<double>(indices.size());
}

namespace {

std::vector<nn::Tensor<float>> Snapshot(const nn::ParamList<float>& params) {
  std::vector<nn::Tensor<float>> out;
  for (const nn::Param<float>* p : params) out.push_back(p->value);
  return out;
}

void Restore(const nn::ParamList<float>& params, const std::vector<nn::Tensor<float>>& values) {
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace

TrainReport TrainBc(const Dataset& ds, nn::PolicyNet<float>& net, const TrainConfig& config,
                    const EpochCallback& on_epoch) {
  config.Validate();
  if (!ds.has_split()) throw TooFewRecords("dataset has no train/validation split");
  if (ds.train().empty() || ds.val().empty()) throw TooFewRecords("empty train or validation split");

  const nn::ParamList<float> params = net.Parameters();
  nn::Adam<float> opt(config.adam);
  EarlyStopping stopper(config.patience);
  TrainReport report;

  EpochLoss initial{0, EvaluateLoss(net, ds, ds.train()), EvaluateLoss(net, ds, ds.val())};
  report.loss_history.push_back(initial);
  stopper.Update(0, initial.val);
  std::vector<nn::Tensor<float>> best = Snapshot(params);
  if (on_epoch) on_epoch(initial);

  std::vector<size_t> order = ds.train();
  Mat<float> x, y;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::mt19937_64 rng(DeriveSeed(config.seed, static_cast<uint64_t>(epoch)));
    for (size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[static_cast<size_t>(rng() % (i + 1))]);
    }
    double train_sum = 0.0;
    for (size_t b = 0; b < order.size(); b += static_cast<size_t>(config.batch)) {
      const size_t e = std::min(order.size(), b + static_cast<size_t>(config.batch));
      PackRecords(ds, order, b, e, x, y);
      net.ZeroGrad();
      nn::LossGrad<float> lg = nn::SquashedMse(net.Forward(x), y);
      net.Backward(lg.dz);
      nn::CheckGradients(params);
      opt.Step(params);
      train_sum += lg.loss * static_cast<double>(e - b);
    }
    CheckParametersFinite(params);

    EpochLoss el{epoch, train_sum / static_cast<double>(order.size()), EvaluateLoss(net, ds, ds.val())};
    report.loss_history.push_back(el);
    report.epochs_run = epoch;
    if (stopper.Update(epoch, el.val)) best = Snapshot(params);
    if (on_epoch) on_epoch(el);
    if (stopper.ShouldStop()) {
      report.stopped_early = true;
      break;
    }
  }
  Restore(params, best);
  report.best_epoch = stopper.best_epoch();
  report.best_val_loss = stopper.best();
  return report;
}

}  // namespace laneforge
