#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "laneforge/render/renderer.hpp"
#include "laneforge/sim/types.hpp"

namespace laneforge {

struct Demonstration {
  Observation obs;
  Action action;
};

// Receives (observation, action) pairs during collection. A sink that does
// not want observations lets the collector skip rendering.
class DemoSink {
 public:
  virtual ~DemoSink() = default;
  virtual bool wants_observations() const { return true; }
  // `obs` is null when wants_observations() is false.
  virtual void Add(const Observation* obs, const Action& action) = 0;
};

// Counts records without storing them.
class CountingSink : public DemoSink {
 public:
  bool wants_observations() const override { return false; }
  void Add(const Observation*, const Action&) override { ++count_; }
  size_t count() const { return count_; }

 private:
  size_t count_ = 0;
};

struct DatasetInfo {
  std::vector<std::string> maps;
  bool domain_rand = false;
  uint64_t seed = 0;
  int episodes = 0;
  int steps_per_episode = 0;
  std::string config_hash;
};

inline constexpr double kTrainFraction = 0.8;
inline constexpr size_t kMinSplitRecords = 5;

struct SplitIndices {
  std::vector<size_t> train;
  std::vector<size_t> val;
};

// Uniform shuffle of [0, n) by seed; the first round(0.8 n) indices train.
// Throws TooFewRecords below kMinSplitRecords.
SplitIndices ShuffleSplit(size_t n, uint64_t seed);

// Observations packed contiguously (HWC floats, record order). Actions are
// kept at float precision.
class Dataset : public DemoSink {
 public:
  void Add(const Observation* obs, const Action& action) override;
  void Add(const Observation& obs, const Action& action) { Add(&obs, action); }
  void Append(const Dataset& other);
  void Reserve(size_t records);

  size_t size() const { return actions_.size(); }
  const float* obs(size_t i) const { return obs_.data() + i * kObsSize; }
  Observation observation(size_t i) const;
  const Action& action(size_t i) const { return actions_[i]; }
  const std::vector<float>& obs_buffer() const { return obs_; }
  const std::vector<Action>& actions() const { return actions_; }

  bool has_split() const { return split_seed_.has_value(); }
  std::optional<uint64_t> split_seed() const { return split_seed_; }
  const std::vector<size_t>& train() const { return train_; }
  const std::vector<size_t>& val() const { return val_; }

  DatasetInfo& info() { return info_; }
  const DatasetInfo& info() const { return info_; }

  // ShuffleSplit over the current records.
  void Split(uint64_t seed);

 private:
  std::vector<float> obs_;
  std::vector<Action> actions_;
  std::vector<size_t> train_;
  std::vector<size_t> val_;
  std::optional<uint64_t> split_seed_;
  DatasetInfo info_;
};

Dataset SplitDataset(Dataset ds, uint64_t seed);

// Directory with manifest.json, obs.f32 and act.f32.
void SaveDataset(const Dataset& ds, const std::string& dir);
Dataset LoadDataset(const std::string& dir);

}  // namespace laneforge
