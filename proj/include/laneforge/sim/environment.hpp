#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "laneforge/sim/domain_rand.hpp"
#include "laneforge/sim/track_map.hpp"
#include "laneforge/sim/types.hpp"

namespace laneforge {

enum class MapChoice { kRandom, kFixed };

struct ResetOptions {
  MapChoice map_choice = MapChoice::kRandom;
  int fixed_map = 0;
  bool domain_rand = false;
  uint64_t seed = 0;
};

struct ResetResult {
  RobotState state;
  SimParams params;
};

// Spawn tolerances around the right-lane centerline.
inline constexpr double kSpawnMaxOffset = 0.05;
inline constexpr double kSpawnMaxHeadingError = 0.2;

// 15 s at 30 Hz.
inline constexpr int kEvalEpisodeSteps = 450;

// Gym-style lane-following environment. Owned by a single thread; the maps it
// references are immutable and may be shared between instances.
class Environment {
 public:
  explicit Environment(std::vector<std::shared_ptr<const TrackMap>> maps,
                       DomainRandConfig domain_rand = {},
                       int max_steps = kEvalEpisodeSteps);

  ResetResult Reset(const ResetOptions& options);
  StepResult Step(const PwmSignals& pwm);
  StepResult Step(const Action& action);

  const TrackMap& track() const { return *maps_[map_index_]; }
  std::shared_ptr<const TrackMap> track_ptr() const { return maps_[map_index_]; }
  const std::vector<std::shared_ptr<const TrackMap>>& maps() const { return maps_; }
  const SimParams& params() const { return params_; }
  const RobotState& state() const { return state_; }
  const DomainRandConfig& domain_rand() const { return domain_rand_; }
  int map_index() const { return map_index_; }
  int steps() const { return steps_; }
  int max_steps() const { return max_steps_; }
  void set_max_steps(int n) { max_steps_ = n; }
  bool done() const { return done_; }

 private:
  std::vector<std::shared_ptr<const TrackMap>> maps_;
  DomainRandConfig domain_rand_;
  int max_steps_;
  int map_index_ = 0;
  SimParams params_;
  RobotState state_;
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace laneforge
