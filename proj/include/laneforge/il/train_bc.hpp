#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "laneforge/il/dataset.hpp"
#include "laneforge/nn/adam.hpp"
#include "laneforge/nn/networks.hpp"

namespace laneforge {

struct TrainConfig {
  int batch = 32;
  int patience = 25;
  int max_epochs = 200;
  nn::AdamConfig adam;
  uint64_t seed = 0;

  void Validate() const;
};

struct EpochLoss {
  int epoch = 0;
  double train = 0.0;
  double val = 0.0;
};

// Entry 0 of loss_history holds the losses of the initial weights.
struct TrainReport {
  int epochs_run = 0;
  int best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<EpochLoss> loss_history;
  bool stopped_early = false;
};

// Counts epochs since the last strict improvement of the validation loss.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Returns true when `val` is a new best.
  bool Update(int epoch, double val) {
    if (val < best_) {
      best_ = val;
      best_epoch_ = epoch;
      stale_ = 0;
      return true;
    }
    ++stale_;
    return false;
  }
  bool ShouldStop() const { return stale_ >= patience_; }
  double best() const { return best_; }
  int best_epoch() const { return best_epoch_; }

 private:
  int patience_;
  double best_ = std::numeric_limits<double>::infinity();
  int best_epoch_ = -1;
  int stale_ = 0;
};

using EpochCallback = std::function<void(const EpochLoss&)>;

// Mean squared error over (throttle, steering) of the squashed outputs on the
// records at `indices`.
double EvaluateLoss(nn::PolicyNet<float>& net, const Dataset& ds,
                    const std::vector<size_t>& indices, int batch = 256);

// Minibatch Adam on the train split with early stopping on the validation
// split. The net is left at the best-validation checkpoint.
TrainReport TrainBc(const Dataset& ds, nn::PolicyNet<float>& net, const TrainConfig& config,
                    const EpochCallback& on_epoch = {});

// Packs records `indices[begin, end)` into a CHW batch plus target actions.
void PackRecords(const Dataset& ds, const std::vector<size_t>& indices, size_t begin, size_t end,
                 nn::Mat<float>& x, nn::Mat<float>& y);

// Throws NonFiniteGradient naming the first parameter with a NaN/Inf value.
void CheckParametersFinite(const nn::ParamList<float>& params);

}  // namespace laneforge
