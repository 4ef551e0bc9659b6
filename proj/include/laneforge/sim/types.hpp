#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace laneforge {

using Rgb = std::array<double, 3>;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Wraps an angle into (-pi, pi].
inline double NormalizeAngle(double a) {
  constexpr double kPi = std::numbers::pi;
  if (a > kPi || a <= -kPi) {
    a = std::remainder(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
  }
  return a;
}

// Robot command. Positive steering turns left (right wheel faster).
class Action {
 public:
  Action() = default;
  Action(double throttle, double steering)
      : throttle_(std::clamp(throttle, 0.0, 1.0)),
        steering_(std::clamp(steering, -1.0, 1.0)) {}

  double throttle() const { return throttle_; }
  double steering() const { return steering_; }

  bool operator==(const Action&) const = default;

 private:
  double throttle_ = 0.0;
  double steering_ = 0.0;
};

class PwmSignals {
 public:
  PwmSignals() = default;
  PwmSignals(double left, double right)
      : left_(std::clamp(left, -1.0, 1.0)), right_(std::clamp(right, -1.0, 1.0)) {}

  double left() const { return left_; }
  double right() const { return right_; }

  bool operator==(const PwmSignals&) const = default;

 private:
  double left_ = 0.0;
  double right_ = 0.0;
};

struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // (-pi, pi]
  double v_left = 0.0;
  double v_right = 0.0;
  double t = 0.0;

  bool operator==(const RobotState&) const = default;
};

struct LanePose {
  double d = 0.0;    // offset from the right-lane centerline, + toward road center
  double phi = 0.0;  // heading error against the lane direction
  double curvature = 0.0;
  bool in_right_lane = false;
  bool on_drivable = false;
};

struct SimParams {
  double wheel_base = 0.102;
  double wheel_gain = 1.2;
  double cam_height = 0.11;
  double cam_pitch = 0.35;
  double cam_fov = 1.75;
  double light_intensity = 1.0;
  Rgb road_color = {0.30, 0.30, 0.32};
  Rgb lane_white = {0.92, 0.92, 0.92};
  Rgb lane_yellow = {0.95, 0.80, 0.10};
  Rgb sky_color = {0.55, 0.75, 0.95};
  Rgb grass_color = {0.25, 0.55, 0.20};
  double friction_scale = 1.0;
  double dt = 1.0 / 30.0;

  bool operator==(const SimParams&) const = default;
};

enum class DoneReason { kRunning, kOffRoad, kTimeLimit };

const char* ToString(DoneReason reason);

struct StepResult {
  RobotState state;
  LanePose lane_pose;
  bool done = false;
  DoneReason done_reason = DoneReason::kRunning;
};

}  // namespace laneforge
