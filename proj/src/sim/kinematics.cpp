#include "laneforge/sim/kinematics.hpp"

#include <cmath>

namespace laneforge {

PwmSignals ActionToPwm(const Action& a) {
  return PwmSignals(a.throttle() - 0.5 * a.steering(),
                    a.throttle() + 0.5 * a.steering());
}

RobotState IntegrateArc(const RobotState& s, const PwmSignals& pwm,
                        const SimParams& params, double dt) {
  RobotState out = s;
  const double k = params.wheel_gain * params.friction_scale;
  out.v_left = k * pwm.left();
  out.v_right = k * pwm.right();
  const double v = 0.5 * (out.v_left + out.v_right);
  const double omega = (out.v_right - out.v_left) / params.wheel_base;
  if (std::abs(omega) < 1e-9) {
    out.x += v * std::cos(s.heading) * dt;
    out.y += v * std::sin(s.heading) * dt;
  } else {
    const double h1 = s.heading + omega * dt;
    const double radius = v / omega;
    out.x += radius * (std::sin(h1) - std::sin(s.heading));
    out.y -= radius * (std::cos(h1) - std::cos(s.heading));
  }
  out.heading = NormalizeAngle(s.heading + omega * dt);
  return out;
}

}  // namespace laneforge
