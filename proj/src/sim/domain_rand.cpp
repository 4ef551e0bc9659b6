#include "laneforge/sim/domain_rand.hpp"

#include <cmath>
#include <random>
#include <string>

#include "laneforge/errors.hpp"

namespace laneforge {
namespace {

void CheckRange(const Range& r, double value, const std::string& field) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
    throw InvalidRange(field + ": range must satisfy lo <= hi");
  }
  if (value < r.lo || value > r.hi) {
    throw InvalidRange(field + ": nominal value outside range");
  }
}

void CheckColor(const ColorRange& r, const Rgb& value, const std::string& field) {
  for (int i = 0; i < 3; ++i) {
    Range c{r.lo[i], r.hi[i]};
    if (c.lo < 0.0 || c.hi > 1.0) {
      throw InvalidRange(field + ": color components must lie in [0,1]");
    }
    CheckRange(c, value[i], field);
  }
}

double Draw(std::mt19937_64& rng, const Range& r) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

Rgb Draw(std::mt19937_64& rng, const ColorRange& r) {
  Rgb out;
  for (int i = 0; i < 3; ++i) out[i] = Draw(rng, Range{r.lo[i], r.hi[i]});
  return out;
}

}  // namespace

void ValidateDomainRand(const DomainRandConfig& c) {
  const SimParams& n = c.nominal;
  CheckRange(c.wheel_base, n.wheel_base, "wheel_base");
  CheckRange(c.wheel_gain, n.wheel_gain, "wheel_gain");
  CheckRange(c.cam_height, n.cam_height, "cam_height");
  CheckRange(c.cam_pitch, n.cam_pitch, "cam_pitch");
  CheckRange(c.cam_fov, n.cam_fov, "cam_fov");
  CheckRange(c.light_intensity, n.light_intensity, "light_intensity");
  CheckColor(c.road_color, n.road_color, "road_color");
  CheckColor(c.lane_white, n.lane_white, "lane_white");
  CheckColor(c.lane_yellow, n.lane_yellow, "lane_yellow");
  CheckColor(c.sky_color, n.sky_color, "sky_color");
  CheckColor(c.grass_color, n.grass_color, "grass_color");
  CheckRange(c.friction_scale, n.friction_scale, "friction_scale");
  CheckRange(c.dt, n.dt, "dt");
  if (!(c.wheel_base.lo > 0.0)) throw InvalidRange("wheel_base must be > 0");
  if (!(c.wheel_gain.lo > 0.0)) throw InvalidRange("wheel_gain must be > 0");
  if (!(c.dt.lo > 0.0)) throw InvalidRange("dt must be > 0");
  if (!(c.cam_height.lo > 0.0)) throw InvalidRange("cam_height must be > 0");
  if (!(c.cam_fov.lo > 0.0) || c.cam_fov.hi >= 3.0) {
    throw InvalidRange("cam_fov must lie in (0, 3)");
  }
}

SimParams SampleDomainRandomization(uint64_t seed, const DomainRandConfig& c) {
  ValidateDomainRand(c);
  if (!c.enabled) return c.nominal;
  std::mt19937_64 rng(seed);
  SimParams p;
  p.wheel_base = Draw(rng, c.wheel_base);
  p.wheel_gain = Draw(rng, c.wheel_gain);
  p.cam_height = Draw(rng, c.cam_height);
  p.cam_pitch = Draw(rng, c.cam_pitch);
  p.cam_fov = Draw(rng, c.cam_fov);
  p.light_intensity = Draw(rng, c.light_intensity);
  p.road_color = Draw(rng, c.road_color);
  p.lane_white = Draw(rng, c.lane_white);
  p.lane_yellow = Draw(rng, c.lane_yellow);
  p.sky_color = Draw(rng, c.sky_color);
  p.grass_color = Draw(rng, c.grass_color);
  p.friction_scale = Draw(rng, c.friction_scale);
  p.dt = Draw(rng, c.dt);
  return p;
}

}  // namespace laneforge
