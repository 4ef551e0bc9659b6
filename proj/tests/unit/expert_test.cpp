#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "laneforge/errors.hpp"
#include "laneforge/expert/pure_pursuit.hpp"
#include "laneforge/sim/environment.hpp"
#include "oracles.hpp"

namespace laneforge {
namespace {

class ExpertTest : public ::testing::Test {
 protected:
  std::shared_ptr<const TrackMap> map_ = LoadBundledMap("loop_notch");
  // Bottom run: four consecutive straights, columns 1..4 of row 3.
  Traversal Straight(int col) const { return map_->CanonicalTraversal({col, 3}); }
  RobotState OnLane(const Traversal& tr, double s, double d = 0.0, double dh = 0.0) const {
    return oracle::PoseNearLane(oracle::DenseLane(*map_, tr, 1000), s, d, dh);
  }
};

TEST_F(ExpertTest, LookaheadOnStraight) {
  Traversal tr = Straight(2);
  RobotState s = OnLane(tr, 0.2);
  Vec2 p = LookaheadPoint(*map_, s, 0.3);
  EXPECT_NEAR(p.x, s.x + 0.3 * std::cos(s.heading), 1e-12);
  EXPECT_NEAR(p.y, s.y + 0.3 * std::sin(s.heading), 1e-12);
}

TEST_F(ExpertTest, LookaheadSpillsOntoCurve) {
  // Last straight before a corner; follow canonical order to find one.
  const Loop& loop = map_->loops()[0];
  size_t i = 0;
  while (IsCurve(map_->kind(loop.tiles[i].tile)) ||
         !IsCurve(map_->kind(map_->Next(loop.tiles[i]).tile))) {
    ++i;
  }
  Traversal straight = loop.tiles[i];
  Traversal curve = map_->Next(straight);
  const double t = map_->tile_size();
  RobotState s = OnLane(straight, 0.9);  // 0.1 t left on this tile
  const double L = 0.15;  // stays within the shortest curve lane
  Vec2 p = LookaheadPoint(*map_, s, L);
  // Hand composition: remainder of the straight, then arc length along the
  // curve lane from its entry.
  const double rest = L - 0.1 * t;
  auto arc = oracle::DenseLane(*map_, curve, 100000);
  double acc = 0.0;
  size_t k = 1;
  for (; k < arc.size(); ++k) {
    acc += std::hypot(arc[k].p.x - arc[k - 1].p.x, arc[k].p.y - arc[k - 1].p.y);
    if (acc >= rest) break;
  }
  EXPECT_NEAR(p.x, arc[k].p.x, 1e-5);
  EXPECT_NEAR(p.y, arc[k].p.y, 1e-5);
  auto tile = map_->TileAt(p.x, p.y);
  ASSERT_TRUE(tile.has_value());
  EXPECT_EQ(*tile, curve.tile);
}

TEST_F(ExpertTest, LookaheadIgnoresLateralOffset) {
  Traversal tr = Straight(2);
  Vec2 a = LookaheadPoint(*map_, OnLane(tr, 0.3), 0.25);
  Vec2 b = LookaheadPoint(*map_, OnLane(tr, 0.3, 0.05), 0.25);
  EXPECT_NEAR(a.x, b.x, 1e-12);
  EXPECT_NEAR(a.y, b.y, 1e-12);
}

TEST_F(ExpertTest, OffRoadPoseThrows) {
  RobotState s;
  s.x = -0.5;
  s.y = -0.5;
  EXPECT_THROW(LookaheadPoint(*map_, s, 0.25), OffRoad);
  EXPECT_THROW(ExpertAction(s, *map_, {}, {}), OffRoad);
}

TEST_F(ExpertTest, AlignedOnCenterlineGoesStraight) {
  PurePursuitConfig cfg;
  ExpertDecision d = ExpertAction(OnLane(Straight(2), 0.3), *map_, cfg, {});
  EXPECT_NEAR(d.action.steering(), 0.0, 1e-12);
  EXPECT_EQ(d.action.throttle(), cfg.v_straight);
  EXPECT_TRUE(d.state.valid);
}

TEST_F(ExpertTest, HandEvaluatedSteering) {
  PurePursuitConfig cfg;
  cfg.kp_straight = 2.0;
  RobotState s = OnLane(Straight(2), 0.3);
  // Lookahead bearing equals the lane heading here; turn the robot 0.1 rad
  // to the left of it.
  s.heading = NormalizeAngle(s.heading + 0.1);
  ExpertDecision d = ExpertAction(s, *map_, cfg, {});
  EXPECT_NEAR(d.alpha, -0.1, 1e-12);
  EXPECT_NEAR(d.action.steering(), -0.2, 1e-12);
}

TEST_F(ExpertTest, ConstantAlphaHasNoDerivativeTerm) {
  PurePursuitConfig cfg;
  RobotState s = OnLane(Straight(2), 0.3, 0.0, 0.05);
  ExpertDecision first = ExpertAction(s, *map_, cfg, {});
  ExpertDecision second = ExpertAction(s, *map_, cfg, first.state);
  EXPECT_DOUBLE_EQ(first.action.steering(), second.action.steering());
  EXPECT_NEAR(second.action.steering(), cfg.kp_straight * first.alpha, 1e-12);
}

TEST_F(ExpertTest, DerivativeUsesAlphaChange) {
  PurePursuitConfig cfg;
  RobotState s = OnLane(Straight(2), 0.3, 0.0, 0.05);
  ExpertState mem{0.02, true};
  ExpertDecision d = ExpertAction(s, *map_, cfg, mem);
  EXPECT_NEAR(d.action.steering(),
              std::clamp(cfg.kp_straight * d.alpha + cfg.kd_straight * (d.alpha - 0.02), -1.0, 1.0),
              1e-12);
}

TEST_F(ExpertTest, CurveGainsOnCurveTiles) {
  PurePursuitConfig cfg;
  const Loop& loop = map_->loops()[0];
  for (const Traversal& tr : loop.tiles) {
    if (!IsCurve(map_->kind(tr.tile))) continue;
    ExpertDecision d = ExpertAction(OnLane(tr, 0.5), *map_, cfg, {});
    EXPECT_EQ(d.action.throttle(), cfg.v_curve);
  }
}

TEST_F(ExpertTest, FirstStepSteeringIsOddInAlpha) {
  PurePursuitConfig cfg;
  RobotState base = OnLane(Straight(2), 0.3);
  for (double dh : {0.02, 0.07, 0.15}) {
    RobotState l = base, r = base;
    l.heading = NormalizeAngle(base.heading + dh);
    r.heading = NormalizeAngle(base.heading - dh);
    EXPECT_NEAR(ExpertAction(l, *map_, cfg, {}).action.steering(),
                -ExpertAction(r, *map_, cfg, {}).action.steering(), 1e-12);
  }
}

TEST_F(ExpertTest, NoProportionalExcitationOnCenterline) {
  PurePursuitConfig cfg;
  RobotState s = OnLane(Straight(2), 0.3);
  ExpertState mem{0.04, true};
  ExpertDecision d = ExpertAction(s, *map_, cfg, mem);
  EXPECT_LE(std::abs(d.action.steering()), cfg.kd_straight * std::abs(d.alpha - 0.04) + 1e-12);
}

TEST(PurePursuitConfigTest, ValidationNamesField) {
  PurePursuitConfig cfg;
  cfg.v_curve = 1.5;
  try {
    cfg.Validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("v_curve"), std::string::npos);
  }
  PurePursuitConfig neg;
  neg.lookahead = 0.0;
  EXPECT_THROW(neg.Validate(), ConfigError);
  PurePursuitConfig gains;
  gains.kd_curve = -1.0;
  EXPECT_THROW(gains.Validate(), ConfigError);
}

// Reduced closed-loop run; the acceptance binary covers 100 spawns per map.
TEST(ExpertClosedLoop, CompletesEpisodesOnEveryMap) {
  for (const auto& name : BundledMapNames()) {
    Environment env({LoadBundledMap(name)});
    for (uint64_t seed = 0; seed < 10; ++seed) {
      ResetOptions o;
      o.seed = seed;
      o.domain_rand = seed % 2 == 1;
      env.Reset(o);
      ExpertState mem;
      StepResult r;
      int in_lane = 0, steps = 0;
      do {
        ExpertDecision d = ExpertAction(env.state(), env.track(), {}, mem);
        mem = d.state;
        r = env.Step(d.action);
        in_lane += r.lane_pose.in_right_lane;
        ++steps;
      } while (!r.done);
      EXPECT_EQ(r.done_reason, DoneReason::kTimeLimit) << name << " seed " << seed;
      EXPECT_EQ(steps, kEvalEpisodeSteps);
      EXPECT_GE(in_lane, 0.99 * steps);
    }
  }
}

}  // namespace
}  // namespace laneforge
