#pragma once

#include "laneforge/sim/types.hpp"

namespace laneforge {

// left = throttle - steering/2, right = throttle + steering/2, clamped.
PwmSignals ActionToPwm(const Action& a);

// Differential-drive unicycle integrated over `dt` along the exact arc.
// Sets wheel speeds on the returned state; `t` is left untouched.
RobotState IntegrateArc(const RobotState& s, const PwmSignals& pwm,
                        const SimParams& params, double dt);

}  // namespace laneforge
