#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "laneforge/sim/environment.hpp"
#include "laneforge/sim/track_map.hpp"
#include "laneforge/sim/types.hpp"

namespace laneforge {

inline constexpr int kRawHeight = 480;
inline constexpr int kRawWidth = 640;
inline constexpr int kObsHeight = 60;
inline constexpr int kObsWidth = 80;
inline constexpr int kChannels = 3;
inline constexpr int kObsSize = kObsHeight * kObsWidth * kChannels;

// Road markings, meters.
inline constexpr double kWhiteLineWidth = 0.048;
inline constexpr double kYellowLineWidth = 0.024;
inline constexpr double kDashPeriod = 0.2;
inline constexpr double kDashPainted = 0.6;  // fraction of the period

// 480x640 RGB8, row-major, interleaved channels.
struct RawImage {
  std::vector<uint8_t> pixels =
      std::vector<uint8_t>(static_cast<size_t>(kRawHeight) * kRawWidth * kChannels);

  uint8_t at(int row, int col, int ch) const {
    return pixels[(static_cast<size_t>(row) * kRawWidth + col) * kChannels + ch];
  }
  bool operator==(const RawImage&) const = default;
};

// 60x80 RGB in [0,1], row-major, interleaved channels.
struct Observation {
  std::vector<float> values = std::vector<float>(kObsSize, 0.0f);

  float at(int row, int col, int ch) const {
    return values[(static_cast<size_t>(row) * kObsWidth + col) * kChannels + ch];
  }
  bool operator==(const Observation&) const = default;
};

enum class SurfaceClass { kSky, kGrass, kRoad, kWhiteLine, kYellowLine };

// Material of a ground point.
SurfaceClass ClassifyGround(const TrackMap& track, Vec2 p);

// Color written for a surface under `params`, before quantization.
Rgb SurfaceColor(SurfaceClass c, const SimParams& params);
std::array<uint8_t, 3> Quantize(const Rgb& c);

struct CameraRay {
  double dx, dy, dz;
};

// Pinhole camera looking along the robot heading, pitched down by cam_pitch.
class Camera {
 public:
  Camera(const RobotState& state, const SimParams& params);

  CameraRay Ray(int row, int col) const;
  // Ground-plane point seen by a pixel, or nullopt above the horizon.
  std::optional<Vec2> GroundPoint(int row, int col) const;

 private:
  double x_, y_, height_, focal_;
  double fwd_[3], right_[3], up_[3];
};

// Parallel (OpenMP over rows) renderer.
RawImage Render(const RobotState& state, const TrackMap& track,
                const SimParams& params);
// Serial per-pixel reference: same image, no precomputation.
RawImage RenderReference(const RobotState& state, const TrackMap& track,
                         const SimParams& params);

// 8x8 block mean, then /255. Throws DimensionMismatch on a malformed image.
Observation Preprocess(const RawImage& img);
Observation PreprocessReference(const RawImage& img);

// Rendered and preprocessed view of the environment's current state.
Observation Observe(const Environment& env);

void WritePpm(const RawImage& img, const std::string& path);

}  // namespace laneforge
