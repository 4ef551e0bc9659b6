#pragma once

#include <cstdint>

#include "laneforge/sim/types.hpp"

namespace laneforge {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct ColorRange {
  Rgb lo{};
  Rgb hi{};
};

// Per-field uniform sampling ranges. With `enabled` false every sample is the
// nominal parameter set.
struct DomainRandConfig {
  bool enabled = false;
  SimParams nominal;

  // Wide enough that a policy trained only on nominal frames visibly
  // degrades; narrower ranges left it unaffected.
  Range wheel_base{0.087, 0.117};
  Range wheel_gain{0.9, 1.5};
  Range cam_height{0.08, 0.14};
  Range cam_pitch{0.23, 0.47};
  Range cam_fov{1.45, 2.05};
  Range light_intensity{0.05, 2.2};
  ColorRange road_color{{0.0, 0.0, 0.0}, {0.9, 0.9, 1.0}};
  ColorRange lane_white{{0.41, 0.41, 0.41}, {1.0, 1.0, 1.0}};
  ColorRange lane_yellow{{0.35, 0.05, 0.0}, {1.0, 1.0, 0.85}};
  ColorRange sky_color{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
  ColorRange grass_color{{0.0, 0.0, 0.0}, {1.0, 1.0, 0.95}};
  Range friction_scale{0.7, 1.3};
  Range dt{1.0 / 30.0, 1.0 / 30.0};
};

// Throws InvalidRange when a range is unordered or non-finite, or when the
// nominal parameters fall outside their ranges.
void ValidateDomainRand(const DomainRandConfig& config);

SimParams SampleDomainRandomization(uint64_t seed, const DomainRandConfig& config);

}  // namespace laneforge
