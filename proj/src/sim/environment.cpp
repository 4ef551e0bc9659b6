#include "laneforge/sim/environment.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "laneforge/errors.hpp"
#include "laneforge/sim/kinematics.hpp"

namespace laneforge {

Environment::Environment(std::vector<std::shared_ptr<const TrackMap>> maps,
                         DomainRandConfig domain_rand, int max_steps)
    : maps_(std::move(maps)),
      domain_rand_(std::move(domain_rand)),
      max_steps_(max_steps) {
  ValidateDomainRand(domain_rand_);
}

ResetResult Environment::Reset(const ResetOptions& options) {
  if (maps_.empty()) throw NoMapsRegistered("environment has no maps");
  std::mt19937_64 rng(options.seed);
  if (options.map_choice == MapChoice::kRandom) {
    map_index_ = std::uniform_int_distribution<int>(
        0, static_cast<int>(maps_.size()) - 1)(rng);
  } else {
    if (options.fixed_map < 0 ||
        options.fixed_map >= static_cast<int>(maps_.size())) {
      throw NoMapsRegistered("fixed map index out of range");
    }
    map_index_ = options.fixed_map;
  }
  DomainRandConfig dr = domain_rand_;
  dr.enabled = options.domain_rand;
  params_ = SampleDomainRandomization(rng(), dr);

  const TrackMap& map = track();
  const bool backward = std::bernoulli_distribution(0.5)(rng);
  double total = 0.0;
  for (const Loop& l : map.loops()) {
    total += backward ? l.backward_length : l.forward_length;
  }
  double s = std::uniform_real_distribution<double>(0.0, total)(rng);
  const double offset = std::uniform_real_distribution<double>(
      -kSpawnMaxOffset, kSpawnMaxOffset)(rng);
  const double heading_error = std::uniform_real_distribution<double>(
      -kSpawnMaxHeadingError, kSpawnMaxHeadingError)(rng);

  // Walk the loops to the tile containing arc position s.
  Traversal where;
  double along = 0.0;
  bool found = false;
  for (const Loop& l : map.loops()) {
    const double len = backward ? l.backward_length : l.forward_length;
    if (s > len) {
      s -= len;
      continue;
    }
    const size_t n = l.tiles.size();
    for (size_t k = 0; k < n && !found; ++k) {
      const size_t i = backward ? n - 1 - k : k;
      Traversal tr = backward ? l.tiles[i].Reversed() : l.tiles[i];
      const double start =
          backward ? l.backward_offset[i] : l.forward_offset[i];
      const double lane_len = map.Project(tr, map.TileOrigin(tr.tile)).lane_length;
      if (s <= start + lane_len || k + 1 == n) {
        where = tr;
        along = std::min(s - start, lane_len);
        found = true;
      }
    }
    if (found) break;
  }

  Vec2 p = map.LanePoint(where, along);
  const double tangent = map.Project(where, p).tangent;
  const double normal = tangent + std::numbers::pi / 2;
  state_ = RobotState{};
  state_.x = p.x + offset * std::cos(normal);
  state_.y = p.y + offset * std::sin(normal);
  state_.heading = NormalizeAngle(tangent + heading_error);
  steps_ = 0;
  done_ = false;
  return {state_, params_};
}

StepResult Environment::Step(const PwmSignals& pwm) {
  if (done_) throw SteppedAfterDone("episode already finished; call Reset");
  state_ = IntegrateArc(state_, pwm, params_, params_.dt);
  ++steps_;
  state_.t = steps_ * params_.dt;
  StepResult r;
  r.state = state_;
  r.lane_pose = ComputeLanePose(track(), state_);
  if (!r.lane_pose.on_drivable) {
    r.done_reason = DoneReason::kOffRoad;
  } else if (steps_ >= max_steps_) {
    r.done_reason = DoneReason::kTimeLimit;
  }
  r.done = r.done_reason != DoneReason::kRunning;
  done_ = r.done;
  return r;
}

StepResult Environment::Step(const Action& action) {
  return Step(ActionToPwm(action));
}

}  // namespace laneforge
