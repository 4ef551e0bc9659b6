#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "laneforge/errors.hpp"
#include "laneforge/sim/domain_rand.hpp"
#include "laneforge/sim/environment.hpp"
#include "laneforge/sim/kinematics.hpp"
#include "laneforge/sim/track_map.hpp"
#include "oracles.hpp"

namespace laneforge {
namespace {

constexpr char kSquare[] = R"(tile_size: 0.585
CurveSE, Straight_EW, CurveSW
Straight_NS, Grass, Straight_NS
CurveNE, Straight_EW, CurveNW
)";

TEST(LoadMap, SquareLoopHasEightTiles) {
  TrackMap m = LoadMap(kSquare);
  EXPECT_EQ(m.width(), 3);
  EXPECT_EQ(m.height(), 3);
  EXPECT_EQ(m.DrivableCount(), 8);
  ASSERT_EQ(m.loops().size(), 1u);
  EXPECT_EQ(m.loops()[0].tiles.size(), 8u);
  EXPECT_DOUBLE_EQ(m.tile_size(), 0.585);
}

TEST(LoadMap, IsolatedStraightIsDisconnected) {
  EXPECT_THROW(LoadMap("Grass, Grass, Grass\nGrass, Straight_NS, Grass\nGrass, Grass, Grass\n"),
               DisconnectedTrack);
}

TEST(LoadMap, DanglingNeighborIsDisconnected) {
  EXPECT_THROW(LoadMap("CurveSE, Straight_EW, Straight_EW\nCurveNE, Straight_EW, CurveNW\n"),
               DisconnectedTrack);
}

TEST(LoadMap, AllGrassHasNoLoop) {
  EXPECT_THROW(LoadMap("Grass, Grass\nGrass, Grass\n"), DisconnectedTrack);
}

TEST(LoadMap, MalformedSourcesAreParseErrors) {
  EXPECT_THROW(LoadMap(""), ParseError);
  EXPECT_THROW(LoadMap("CurveSE, Bogus\n"), ParseError);
  EXPECT_THROW(LoadMap("CurveSE, CurveSW\nCurveNE\n"), ParseError);
  EXPECT_THROW(LoadMap("tile_size: -1\nCurveSE, CurveSW\nCurveNE, CurveNW\n"), ParseError);
  EXPECT_THROW(LoadMap("tile_size: abc\nCurveSE, CurveSW\nCurveNE, CurveNW\n"), ParseError);
}

TEST(LoadMap, CommentsAndCustomTileSize) {
  TrackMap m = LoadMap("# tiny\ntile_size: 0.5\nCurveSE, CurveSW  # top\nCurveNE, CurveNW\n");
  EXPECT_DOUBLE_EQ(m.tile_size(), 0.5);
  EXPECT_EQ(m.DrivableCount(), 4);
}

TEST(BundledMaps, ObstaclesFreeHasBothChiralities) {
  auto m = LoadBundledMap("loop_obstacles_free");
  EXPECT_GE(m->DrivableCount(), 12);
  // Exhaustive neighbor check is done by the constructor; here count the turn
  // directions actually driven around the loop.
  int left = 0, right = 0;
  for (const Traversal& tr : m->loops()[0].tiles) {
    const double k = m->Project(tr, m->TileOrigin(tr.tile)).curvature;
    left += k > 0;
    right += k < 0;
  }
  EXPECT_GT(left, 0);
  EXPECT_GT(right, 0);
}

TEST(BundledMaps, AtLeastThreeWithOneHeldOut) {
  auto names = BundledMapNames();
  EXPECT_GE(names.size(), 3u);
  auto training = TrainingMapNames();
  EXPECT_EQ(std::count(training.begin(), training.end(), HeldOutMapName()), 0);
  EXPECT_EQ(std::count(names.begin(), names.end(), HeldOutMapName()), 1);
  for (const auto& n : names) EXPECT_NO_THROW(LoadBundledMap(n)) << n;
}

TEST(BundledMaps, CenterlinesJoinAtTileBorders) {
  for (const auto& name : BundledMapNames()) {
    auto m = LoadBundledMap(name);
    for (const Loop& loop : m->loops()) {
      for (const Traversal& tr : loop.tiles) {
        for (const Traversal& dir : {tr, tr.Reversed()}) {
          auto a = oracle::DenseLane(*m, dir, 10);
          auto b = oracle::DenseLane(*m, m->Next(dir), 10);
          EXPECT_NEAR(a.back().p.x, b.front().p.x, 1e-12) << name;
          EXPECT_NEAR(a.back().p.y, b.front().p.y, 1e-12) << name;
          // The library's own lane points agree with the oracle's endpoints.
          const double len = m->Project(dir, m->TileOrigin(dir.tile)).lane_length;
          Vec2 end = m->LanePoint(dir, len);
          EXPECT_NEAR(end.x, a.back().p.x, 1e-9);
          EXPECT_NEAR(end.y, a.back().p.y, 1e-9);
        }
      }
    }
  }
}

TEST(ActionToPwm, Examples) {
  PwmSignals a = ActionToPwm(Action(1.0, 0.0));
  EXPECT_EQ(a.left(), 1.0);
  EXPECT_EQ(a.right(), 1.0);
  PwmSignals b = ActionToPwm(Action(0.0, 0.0));
  EXPECT_EQ(b.left(), 0.0);
  EXPECT_EQ(b.right(), 0.0);
  PwmSignals c = ActionToPwm(Action(0.5, 1.0));
  EXPECT_EQ(c.left(), 0.0);
  EXPECT_EQ(c.right(), 1.0);
  PwmSignals d = ActionToPwm(Action(1.0, 1.0));
  EXPECT_EQ(d.left(), 0.5);
  EXPECT_EQ(d.right(), 1.0);
}

TEST(Action, ClampsToRanges) {
  Action a(1.7, -3.0);
  EXPECT_EQ(a.throttle(), 1.0);
  EXPECT_EQ(a.steering(), -1.0);
  PwmSignals p(-2.0, 2.0);
  EXPECT_EQ(p.left(), -1.0);
  EXPECT_EQ(p.right(), 1.0);
}

TEST(Kinematics, EqualWheelsDriveStraight) {
  SimParams params;
  RobotState s;
  RobotState n = IntegrateArc(s, PwmSignals(0.5, 0.5), params, 1.0 / 30.0);
  EXPECT_NEAR(n.x, 0.02, 1e-15);
  EXPECT_EQ(n.y, 0.0);
  EXPECT_EQ(n.heading, 0.0);
}

TEST(Kinematics, OpposedWheelsRotateInPlace) {
  SimParams params;
  RobotState s;
  s.x = 1.0;
  s.y = 2.0;
  RobotState n = IntegrateArc(s, PwmSignals(-0.5, 0.5), params, 1.0 / 30.0);
  EXPECT_NEAR(n.x, 1.0, 1e-15);
  EXPECT_NEAR(n.y, 2.0, 1e-15);
  EXPECT_NEAR(n.heading, (1.0 / 30.0) * 1.2 / 0.102, 1e-15);
}

TEST(Kinematics, MatchesSubsteppedOracle) {
  SimParams params;
  RobotState s;
  s.x = 0.5;
  s.y = 0.3;
  s.heading = 0.4;
  RobotState a = s;
  for (int i = 0; i < 100; ++i) a = IntegrateArc(a, PwmSignals(0.4, 0.6), params, params.dt);
  RobotState b = oracle::IntegrateRk4(s, 1.2 * 0.4, 1.2 * 0.6, params.wheel_base, params.dt, 100, 1000);
  EXPECT_NEAR(a.x, b.x, 1e-6);
  EXPECT_NEAR(a.y, b.y, 1e-6);
  EXPECT_NEAR(NormalizeAngle(a.heading - b.heading), 0.0, 1e-6);
}

TEST(Kinematics, TwoHalfStepsEqualOneStep) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SimParams params;
  for (int k = 0; k < 200; ++k) {
    RobotState s;
    s.x = u(rng);
    s.y = u(rng);
    s.heading = 3.0 * u(rng);
    PwmSignals pwm(u(rng), u(rng));
    const double dt = 0.05 * (1.0 + u(rng));
    RobotState one = IntegrateArc(s, pwm, params, 2 * dt);
    RobotState two = IntegrateArc(IntegrateArc(s, pwm, params, dt), pwm, params, dt);
    EXPECT_NEAR(one.x, two.x, 1e-9);
    EXPECT_NEAR(one.y, two.y, 1e-9);
    EXPECT_NEAR(NormalizeAngle(one.heading - two.heading), 0.0, 1e-9);
  }
}

TEST(Kinematics, HeadingStaysNormalized) {
  SimParams params;
  RobotState s;
  s.heading = 3.1;
  for (int i = 0; i < 500; ++i) {
    s = IntegrateArc(s, PwmSignals(-1.0, 1.0), params, params.dt);
    ASSERT_GT(s.heading, -std::numbers::pi);
    ASSERT_LE(s.heading, std::numbers::pi);
  }
}

TEST(NormalizeAngleTest, HalfOpenInterval) {
  EXPECT_DOUBLE_EQ(NormalizeAngle(std::numbers::pi), std::numbers::pi);
  EXPECT_DOUBLE_EQ(NormalizeAngle(-std::numbers::pi), std::numbers::pi);
  EXPECT_NEAR(NormalizeAngle(3 * std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(NormalizeAngle(-0.5 - 4 * std::numbers::pi), -0.5, 1e-12);
}

class LanePoseTest : public ::testing::Test {
 protected:
  std::shared_ptr<const TrackMap> map_ = LoadBundledMap("loop_obstacles_free");
};

TEST_F(LanePoseTest, CenterlineOfStraight) {
  // Row 3 is the bottom straight run; canonical traversal direction whatever
  // it is, place the robot on its right lane.
  TileCoord c{1, 3};
  ASSERT_EQ(map_->kind(c), TileKind::kStraightEW);
  Traversal tr = map_->CanonicalTraversal(c);
  auto lane = oracle::DenseLane(*map_, tr, 100);
  RobotState s = oracle::PoseNearLane(lane, 0.5, 0.0, 0.0);
  LanePose lp = ComputeLanePose(*map_, s);
  EXPECT_NEAR(lp.d, 0.0, 1e-12);
  EXPECT_NEAR(lp.phi, 0.0, 1e-12);
  EXPECT_EQ(lp.curvature, 0.0);
  EXPECT_TRUE(lp.in_right_lane);
  EXPECT_TRUE(lp.on_drivable);
}

TEST_F(LanePoseTest, LeftLaneIsNotRightLane) {
  TileCoord c{1, 3};
  Traversal tr = map_->CanonicalTraversal(c);
  auto lane = oracle::DenseLane(*map_, tr, 100);
  const double spacing = map_->tile_size() / 2;
  RobotState s = oracle::PoseNearLane(lane, 0.5, spacing, 0.0);
  LanePose lp = ComputeLanePose(*map_, s);
  EXPECT_NEAR(std::abs(lp.d), spacing, 1e-12);
  EXPECT_FALSE(lp.in_right_lane);
  EXPECT_TRUE(lp.on_drivable);
}

TEST_F(LanePoseTest, CurvatureMagnitudeIsInverseRadius) {
  for (const Traversal& tr : map_->loops()[0].tiles) {
    if (!IsCurve(map_->kind(tr.tile))) continue;
    for (const Traversal& dir : {tr, tr.Reversed()}) {
      auto lane = oracle::DenseLane(*map_, dir, 100);
      const Vec2 o = map_->TileOrigin(dir.tile);
      RobotState s = oracle::PoseNearLane(lane, 0.5, 0.0, 0.0);
      LanePose lp = ComputeLanePose(*map_, s);
      // Radius from three lane samples.
      const Vec2 a = lane[0].p, b = lane[50].p, c = lane[100].p;
      const double ab = std::hypot(a.x - b.x, a.y - b.y), bc = std::hypot(b.x - c.x, b.y - c.y),
                   ca = std::hypot(c.x - a.x, c.y - a.y);
      const double area = 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
      const double r = ab * bc * ca / (4 * area);
      EXPECT_NEAR(std::abs(lp.curvature), 1.0 / r, 1e-9) << o.x << "," << o.y;
    }
  }
}

TEST_F(LanePoseTest, MatchesDenseSamplingOnCurves) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const Traversal& tr : map_->loops()[0].tiles) {
    if (!IsCurve(map_->kind(tr.tile))) continue;
    auto lane = oracle::DenseLane(*map_, tr, 100000);
    for (int k = 0; k < 10; ++k) {
      RobotState s = oracle::PoseNearLane(lane, 0.02 + 0.96 * u(rng), 0.28 * (u(rng) - 0.5),
                                          2.0 * (u(rng) - 0.5));
      LanePose lp = ComputeLanePose(*map_, s);
      oracle::LanePoseRef ref = oracle::NearestLanePose(lane, {s.x, s.y}, s.heading);
      EXPECT_NEAR(lp.d, ref.d, 1e-4);
      EXPECT_NEAR(lp.phi, ref.phi, 1e-4);
    }
  }
}

TEST_F(LanePoseTest, OffMapIsNotDrivable) {
  RobotState s;
  s.x = -1.0;
  s.y = -1.0;
  LanePose lp = ComputeLanePose(*map_, s);
  EXPECT_FALSE(lp.on_drivable);
  EXPECT_FALSE(lp.in_right_lane);
}

TEST(DomainRand, DisabledGivesNominal) {
  DomainRandConfig cfg;
  EXPECT_EQ(SampleDomainRandomization(1, cfg), cfg.nominal);
  EXPECT_EQ(SampleDomainRandomization(99, cfg), cfg.nominal);
}

TEST(DomainRand, SameSeedSameParams) {
  DomainRandConfig cfg;
  cfg.enabled = true;
  EXPECT_EQ(SampleDomainRandomization(7, cfg), SampleDomainRandomization(7, cfg));
  EXPECT_FALSE(SampleDomainRandomization(7, cfg) == SampleDomainRandomization(8, cfg));
}

TEST(DomainRand, LightIntensityMonteCarlo) {
  DomainRandConfig cfg;
  cfg.enabled = true;
  cfg.light_intensity = {0.5, 1.5};
  double sum = 0.0, lo = 2.0, hi = 0.0;
  for (uint64_t s = 0; s < 10000; ++s) {
    const double v = SampleDomainRandomization(s, cfg).light_intensity;
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_NEAR(sum / 10000, 1.0, 0.02);
  EXPECT_GE(lo, 0.5);
  EXPECT_LE(hi, 1.5);
}

TEST(DomainRand, SamplesStayInRanges) {
  DomainRandConfig cfg;
  cfg.enabled = true;
  for (uint64_t s = 0; s < 200; ++s) {
    SimParams p = SampleDomainRandomization(s, cfg);
    EXPECT_GE(p.wheel_base, cfg.wheel_base.lo);
    EXPECT_LE(p.wheel_base, cfg.wheel_base.hi);
    EXPECT_GE(p.cam_pitch, cfg.cam_pitch.lo);
    EXPECT_LE(p.cam_pitch, cfg.cam_pitch.hi);
    for (int c = 0; c < 3; ++c) {
      EXPECT_GE(p.road_color[c], cfg.road_color.lo[c]);
      EXPECT_LE(p.road_color[c], cfg.road_color.hi[c]);
    }
    EXPECT_EQ(p.dt, 1.0 / 30.0);
  }
}

TEST(DomainRand, InvalidRangesAreRejected) {
  DomainRandConfig unordered;
  unordered.light_intensity = {1.2, 0.8};
  EXPECT_THROW(ValidateDomainRand(unordered), InvalidRange);
  DomainRandConfig color;
  color.sky_color.hi = {1.0, 1.0, 1.5};
  EXPECT_THROW(ValidateDomainRand(color), InvalidRange);
  DomainRandConfig nominal_outside;
  nominal_outside.nominal.wheel_gain = 2.0;
  EXPECT_THROW(ValidateDomainRand(nominal_outside), InvalidRange);
  DomainRandConfig nan;
  nan.friction_scale.hi = std::nan("");
  EXPECT_THROW(ValidateDomainRand(nan), InvalidRange);
  EXPECT_THROW(SampleDomainRandomization(1, unordered), InvalidRange);
}

std::vector<std::shared_ptr<const TrackMap>> TrainingMaps() {
  std::vector<std::shared_ptr<const TrackMap>> maps;
  for (const auto& n : TrainingMapNames()) maps.push_back(LoadBundledMap(n));
  return maps;
}

TEST(Environment, ResetIsDeterministic) {
  Environment env(TrainingMaps());
  ResetOptions o;
  o.map_choice = MapChoice::kFixed;
  o.fixed_map = 1;
  o.seed = 0;
  ResetResult a = env.Reset(o);
  ResetResult b = env.Reset(o);
  EXPECT_EQ(a.state, b.state);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.state.t, 0.0);
}

TEST(Environment, RandomMapIsUniform) {
  auto maps = TrainingMaps();
  ASSERT_EQ(maps.size(), 3u);
  Environment env(maps);
  std::map<int, int> counts;
  for (uint64_t s = 0; s < 3000; ++s) {
    ResetOptions o;
    o.seed = s;
    env.Reset(o);
    ++counts[env.map_index()];
  }
  for (const auto& [idx, n] : counts) {
    EXPECT_GE(n / 3000.0, 0.28) << idx;
    EXPECT_LE(n / 3000.0, 0.39) << idx;
  }
}

TEST(Environment, SpawnIsInRightLane) {
  Environment env(TrainingMaps());
  for (uint64_t s = 0; s < 500; ++s) {
    ResetOptions o;
    o.seed = s;
    o.domain_rand = s % 2 == 0;
    ResetResult r = env.Reset(o);
    LanePose lp = ComputeLanePose(env.track(), r.state);
    ASSERT_TRUE(lp.in_right_lane) << s;
    EXPECT_LE(std::abs(lp.d), kSpawnMaxOffset + 1e-12);
    EXPECT_LE(std::abs(lp.phi), kSpawnMaxHeadingError + 1e-12);
  }
}

TEST(Environment, NoMapsRegistered) {
  Environment env({});
  EXPECT_THROW(env.Reset({}), NoMapsRegistered);
}

TEST(Environment, SteppingAfterDoneThrows) {
  Environment env(TrainingMaps(), {}, 3);
  env.Reset({});
  StepResult r;
  for (int i = 0; i < 3; ++i) r = env.Step(Action(0.0, 0.0));
  EXPECT_TRUE(r.done);
  EXPECT_EQ(r.done_reason, DoneReason::kTimeLimit);
  EXPECT_NEAR(r.state.t, 0.1, 1e-15);
  EXPECT_THROW(env.Step(Action(0.0, 0.0)), SteppedAfterDone);
}

TEST(Environment, DrivingStraightEventuallyLeavesRoad) {
  Environment env(TrainingMaps(), {}, 10000);
  ResetOptions o;
  o.seed = 5;
  env.Reset(o);
  StepResult r;
  double last_t = 0.0;
  do {
    r = env.Step(Action(0.8, 0.0));
    ASSERT_GT(r.state.t, last_t);
    last_t = r.state.t;
  } while (!r.done);
  EXPECT_EQ(r.done_reason, DoneReason::kOffRoad);
  EXPECT_FALSE(r.lane_pose.on_drivable);
}

TEST(Environment, EpisodeIsBitReproducible) {
  auto run = [] {
    DomainRandConfig dr;
    Environment env(TrainingMaps(), dr, 60);
    ResetOptions o;
    o.seed = 42;
    o.domain_rand = true;
    env.Reset(o);
    std::vector<RobotState> states;
    for (int i = 0; i < 60; ++i) {
      StepResult r = env.Step(Action(0.3 + 0.001 * i, std::sin(0.1 * i) * 0.3));
      states.push_back(r.state);
      if (r.done) break;
    }
    return states;
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace laneforge
