#pragma once

#include "laneforge/sim/track_map.hpp"
#include "laneforge/sim/types.hpp"

namespace laneforge {

// Two-regime pure pursuit PD gains. Throttles are in [0,1]; kp is steering per
// radian of bearing error, kd steering per radian of change between steps.
struct PurePursuitConfig {
  double lookahead = 0.25;
  double v_straight = 0.8;
  double v_curve = 0.5;
  double kp_straight = 2.5;
  double kp_curve = 4.0;
  double kd_straight = 1.0;
  double kd_curve = 1.0;

  // Throws ConfigError naming the offending field.
  void Validate() const;
};

// D-term memory; one per environment instance.
struct ExpertState {
  double prev_alpha = 0.0;
  bool valid = false;
};

struct ExpertDecision {
  Action action;
  ExpertState state;
  double alpha = 0.0;
};

// Point at arc length `lookahead` ahead of the pose's projection onto the
// right-lane centerline. Throws OffRoad when the pose is not on the road.
Vec2 LookaheadPoint(const TrackMap& track, const RobotState& pose,
                    double lookahead);

ExpertDecision ExpertAction(const RobotState& pose, const TrackMap& track,
                            const PurePursuitConfig& cfg,
                            const ExpertState& memory);

}  // namespace laneforge
