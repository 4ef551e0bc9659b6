#include "laneforge/expert/pure_pursuit.hpp"

#include <cmath>
#include <string>

#include "laneforge/errors.hpp"

namespace laneforge {

void PurePursuitConfig::Validate() const {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(std::string(field) + " " + what);
  };
  require(lookahead > 0.0 && std::isfinite(lookahead), "lookahead", "must be > 0");
  require(v_straight >= 0.0 && v_straight <= 1.0, "v_straight", "must lie in [0,1]");
  require(v_curve >= 0.0 && v_curve <= 1.0, "v_curve", "must lie in [0,1]");
  require(kp_straight >= 0.0 && std::isfinite(kp_straight), "kp_straight", "must be >= 0");
  require(kp_curve >= 0.0 && std::isfinite(kp_curve), "kp_curve", "must be >= 0");
  require(kd_straight >= 0.0 && std::isfinite(kd_straight), "kd_straight", "must be >= 0");
  require(kd_curve >= 0.0 && std::isfinite(kd_curve), "kd_curve", "must be >= 0");
}

Vec2 LookaheadPoint(const TrackMap& track, const RobotState& pose,
                    double lookahead) {
  if (!ComputeLanePose(track, pose).on_drivable) {
    throw OffRoad("pose is not on a drivable surface");
  }
  Vec2 p{pose.x, pose.y};
  Traversal tr = *track.AlignedTraversal(p, pose.heading);
  LaneProjection proj = track.Project(tr, p);
  double along = proj.along;
  double remaining = lookahead;
  double lane_length = proj.lane_length;
  while (along + remaining > lane_length) {
    remaining -= lane_length - along;
    tr = track.Next(tr);
    along = 0.0;
    lane_length = track.Project(tr, track.TileOrigin(tr.tile)).lane_length;
  }
  return track.LanePoint(tr, along + remaining);
}

ExpertDecision ExpertAction(const RobotState& pose, const TrackMap& track,
                            const PurePursuitConfig& cfg,
                            const ExpertState& memory) {
  const LanePose lane = ComputeLanePose(track, pose);
  const Vec2 target = LookaheadPoint(track, pose, cfg.lookahead);
  const double bearing = std::atan2(target.y - pose.y, target.x - pose.x);
  const double alpha = NormalizeAngle(bearing - pose.heading);

  const bool curve = std::abs(lane.curvature) > 0.0;
  const double throttle = curve ? cfg.v_curve : cfg.v_straight;
  const double kp = curve ? cfg.kp_curve : cfg.kp_straight;
  const double kd = curve ? cfg.kd_curve : cfg.kd_straight;
  const double derivative = memory.valid ? alpha - memory.prev_alpha : 0.0;

  ExpertDecision out;
  out.action = Action(throttle, kp * alpha + kd * derivative);
  out.state = {alpha, true};
  out.alpha = alpha;
  return out;
}

}  // namespace laneforge
