#include "laneforge/render/renderer.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "laneforge/errors.hpp"

namespace laneforge {
namespace {

SurfaceClass ClassifyLateral(double lateral, double center_along, double tile) {
  const double a = std::abs(lateral);
  if (a > 0.5 * tile) return SurfaceClass::kGrass;
  if (a >= 0.5 * tile - kWhiteLineWidth) return SurfaceClass::kWhiteLine;
  if (a <= 0.5 * kYellowLineWidth &&
      center_along - std::floor(center_along / kDashPeriod) * kDashPeriod <
          kDashPainted * kDashPeriod) {
    return SurfaceClass::kYellowLine;
  }
  return SurfaceClass::kRoad;
}

// Per-tile geometry resolved once per frame so the inner loop avoids the
// traversal bookkeeping of TrackMap::Project.
struct TileGeom {
  bool drivable = false;
  bool curve = false;
  Vec2 origin;
  Vec2 in;      // straight: entry midpoint
  Vec2 u;       // straight: travel direction
  Vec2 corner;  // curve
  double entry_angle = 0.0;
  double sweep = 0.0;
};

class GroundTable {
 public:
  explicit GroundTable(const TrackMap& track)
      : tile_(track.tile_size()),
        inv_tile_(1.0 / track.tile_size()),
        width_(track.width()),
        height_(track.height()) {
    tiles_.resize(static_cast<size_t>(track.width()) * track.height());
    for (int row = 0; row < track.height(); ++row) {
      for (int col = 0; col < track.width(); ++col) {
        TileCoord c{col, row};
        TileGeom& g = tiles_[static_cast<size_t>(row) * track.width() + col];
        g.drivable = IsDrivable(track.kind(c));
        if (!g.drivable) continue;
        g.curve = IsCurve(track.kind(c));
        g.origin = track.TileOrigin(c);
        Traversal tr = track.CanonicalTraversal(c);
        Vec2 in = Midpoint(tr.entry);
        Vec2 out = Midpoint(tr.exit);
        if (!g.curve) {
          g.in = in;
          g.u = {(out.x - in.x) / tile_, (out.y - in.y) / tile_};
        } else {
          bool east = tr.entry == Side::kEast || tr.exit == Side::kEast;
          bool north = tr.entry == Side::kNorth || tr.exit == Side::kNorth;
          g.corner = {east ? tile_ : 0.0, north ? tile_ : 0.0};
          g.entry_angle = std::atan2(in.y - g.corner.y, in.x - g.corner.x);
          double exit_angle = std::atan2(out.y - g.corner.y, out.x - g.corner.x);
          g.sweep = NormalizeAngle(exit_angle - g.entry_angle) > 0 ? 1.0 : -1.0;
        }
      }
    }
  }

  SurfaceClass Classify(Vec2 w) const {
    const double fc = std::floor(w.x * inv_tile_);
    const double fr = std::floor(w.y * inv_tile_);
    if (!(fc >= 0.0 && fr >= 0.0 && fc < width_ && fr < height_)) {
      return SurfaceClass::kGrass;
    }
    const int col = static_cast<int>(fc);
    const int row = height_ - 1 - static_cast<int>(fr);
    const TileGeom& g = tiles_[static_cast<size_t>(row) * width_ + col];
    if (!g.drivable) return SurfaceClass::kGrass;
    Vec2 p{w.x - g.origin.x, w.y - g.origin.y};
    if (!g.curve) {
      Vec2 rel{p.x - g.in.x, p.y - g.in.y};
      double along = rel.x * g.u.x + rel.y * g.u.y;
      double lateral = -rel.x * g.u.y + rel.y * g.u.x;
      return ClassifyLateral(lateral, along, tile_);
    }
    Vec2 rel{p.x - g.corner.x, p.y - g.corner.y};
    double r = std::sqrt(rel.x * rel.x + rel.y * rel.y);
    double lateral = g.sweep > 0 ? 0.5 * tile_ - r : r - 0.5 * tile_;
    if (std::abs(lateral) > 0.5 * kYellowLineWidth) {
      return ClassifyLateral(lateral, 0.0, tile_);
    }
    double theta = std::atan2(rel.y, rel.x);
    double delta = std::clamp(NormalizeAngle(theta - g.entry_angle) * g.sweep,
                              0.0, std::numbers::pi / 2);
    return ClassifyLateral(lateral, delta * 0.5 * tile_, tile_);
  }

 private:
  Vec2 Midpoint(Side s) const {
    switch (s) {
      case Side::kNorth: return {tile_ / 2, tile_};
      case Side::kSouth: return {tile_ / 2, 0};
      case Side::kEast: return {tile_, tile_ / 2};
      case Side::kWest: return {0, tile_ / 2};
    }
    return {};
  }

  double tile_;
  double inv_tile_;
  int width_;
  int height_;
  std::vector<TileGeom> tiles_;
};

void CheckDims(const RawImage& img) {
  if (img.pixels.size() != static_cast<size_t>(kRawHeight) * kRawWidth * kChannels) {
    throw DimensionMismatch("raw image must be 480x640x3, got " +
                            std::to_string(img.pixels.size()) + " bytes");
  }
}

}  // namespace

SurfaceClass ClassifyGround(const TrackMap& track, Vec2 p) {
  auto c = track.TileAt(p.x, p.y);
  if (!c || !IsDrivable(track.kind(*c))) return SurfaceClass::kGrass;
  LaneProjection proj = track.Project(track.CanonicalTraversal(*c), p);
  return ClassifyLateral(proj.lateral, proj.center_along, track.tile_size());
}

Rgb SurfaceColor(SurfaceClass c, const SimParams& params) {
  Rgb base;
  switch (c) {
    case SurfaceClass::kSky: base = params.sky_color; break;
    case SurfaceClass::kGrass: base = params.grass_color; break;
    case SurfaceClass::kRoad: base = params.road_color; break;
    case SurfaceClass::kWhiteLine: base = params.lane_white; break;
    case SurfaceClass::kYellowLine: base = params.lane_yellow; break;
  }
  for (double& v : base) v = std::clamp(v * params.light_intensity, 0.0, 1.0);
  return base;
}

std::array<uint8_t, 3> Quantize(const Rgb& c) {
  std::array<uint8_t, 3> out;
  for (int i = 0; i < 3; ++i) {
    out[i] = static_cast<uint8_t>(std::lround(255.0 * std::clamp(c[i], 0.0, 1.0)));
  }
  return out;
}

Camera::Camera(const RobotState& s, const SimParams& params)
    : x_(s.x),
      y_(s.y),
      height_(params.cam_height),
      focal_(0.5 * kRawWidth / std::tan(0.5 * params.cam_fov)) {
  const double ch = std::cos(s.heading), sh = std::sin(s.heading);
  const double cp = std::cos(params.cam_pitch), sp = std::sin(params.cam_pitch);
  fwd_[0] = ch * cp; fwd_[1] = sh * cp; fwd_[2] = -sp;
  right_[0] = sh; right_[1] = -ch; right_[2] = 0.0;
  up_[0] = ch * sp; up_[1] = sh * sp; up_[2] = cp;
}

CameraRay Camera::Ray(int row, int col) const {
  const double xn = (col + 0.5 - 0.5 * kRawWidth) / focal_;
  const double yn = (row + 0.5 - 0.5 * kRawHeight) / focal_;
  return {fwd_[0] + xn * right_[0] - yn * up_[0],
          fwd_[1] + xn * right_[1] - yn * up_[1],
          fwd_[2] + xn * right_[2] - yn * up_[2]};
}

std::optional<Vec2> Camera::GroundPoint(int row, int col) const {
  CameraRay ray = Ray(row, col);
  if (ray.dz >= 0.0) return std::nullopt;
  const double t = height_ / -ray.dz;
  return Vec2{x_ + t * ray.dx, y_ + t * ray.dy};
}

RawImage RenderReference(const RobotState& state, const TrackMap& track,
                         const SimParams& params) {
  RawImage img;
  const Camera camera(state, params);
  for (int row = 0; row < kRawHeight; ++row) {
    for (int col = 0; col < kRawWidth; ++col) {
      auto ground = camera.GroundPoint(row, col);
      SurfaceClass c = ground ? ClassifyGround(track, *ground) : SurfaceClass::kSky;
      auto rgb = Quantize(SurfaceColor(c, params));
      size_t i = (static_cast<size_t>(row) * kRawWidth + col) * kChannels;
      img.pixels[i] = rgb[0];
      img.pixels[i + 1] = rgb[1];
      img.pixels[i + 2] = rgb[2];
    }
  }
  return img;
}

RawImage Render(const RobotState& state, const TrackMap& track,
                const SimParams& params) {
  RawImage img;
  const GroundTable table(track);
  const Camera camera(state, params);
  std::array<std::array<uint8_t, 3>, 5> palette;
  for (int c = 0; c < 5; ++c) {
    palette[c] = Quantize(SurfaceColor(static_cast<SurfaceClass>(c), params));
  }
  const auto& sky = palette[static_cast<int>(SurfaceClass::kSky)];
#pragma omp parallel for schedule(static)
  for (int row = 0; row < kRawHeight; ++row) {
    uint8_t* out = img.pixels.data() + static_cast<size_t>(row) * kRawWidth * kChannels;
    // Along a row the ray depth is constant, so ground points are affine in col.
    auto first = camera.GroundPoint(row, 0);
    auto last = camera.GroundPoint(row, kRawWidth - 1);
    if (!first || !last) {
      for (int col = 0; col < kRawWidth; ++col) {
        std::memcpy(out + col * 3, sky.data(), 3);
      }
      continue;
    }
    const double step_x = (last->x - first->x) / (kRawWidth - 1);
    const double step_y = (last->y - first->y) / (kRawWidth - 1);
    for (int col = 0; col < kRawWidth; ++col) {
      Vec2 p{first->x + col * step_x, first->y + col * step_y};
      const auto& rgb = palette[static_cast<int>(table.Classify(p))];
      out[col * 3] = rgb[0];
      out[col * 3 + 1] = rgb[1];
      out[col * 3 + 2] = rgb[2];
    }
  }
  return img;
}

Observation PreprocessReference(const RawImage& img) {
  CheckDims(img);
  Observation obs;
  for (int r = 0; r < kObsHeight; ++r) {
    for (int c = 0; c < kObsWidth; ++c) {
      for (int ch = 0; ch < kChannels; ++ch) {
        double sum = 0.0;
        for (int dr = 0; dr < 8; ++dr) {
          for (int dc = 0; dc < 8; ++dc) sum += img.at(r * 8 + dr, c * 8 + dc, ch);
        }
        obs.values[(static_cast<size_t>(r) * kObsWidth + c) * kChannels + ch] =
            static_cast<float>(sum / 64.0) / 255.0f;
      }
    }
  }
  return obs;
}

Observation Preprocess(const RawImage& img) {
  CheckDims(img);
  Observation obs;
#pragma omp parallel for schedule(static)
  for (int r = 0; r < kObsHeight; ++r) {
    std::array<uint32_t, kObsWidth * kChannels> sums{};
    for (int dr = 0; dr < 8; ++dr) {
      const uint8_t* src =
          img.pixels.data() + static_cast<size_t>(r * 8 + dr) * kRawWidth * kChannels;
      for (int c = 0; c < kObsWidth; ++c) {
        const uint8_t* p = src + c * 8 * kChannels;
        uint32_t s0 = 0, s1 = 0, s2 = 0;
        for (int k = 0; k < 8; ++k) {
          s0 += p[k * 3];
          s1 += p[k * 3 + 1];
          s2 += p[k * 3 + 2];
        }
        sums[c * 3] += s0;
        sums[c * 3 + 1] += s1;
        sums[c * 3 + 2] += s2;
      }
    }
    float* dst = obs.values.data() + static_cast<size_t>(r) * kObsWidth * kChannels;
    for (int i = 0; i < kObsWidth * kChannels; ++i) {
      dst[i] = static_cast<float>(sums[i] / 64.0) / 255.0f;
    }
  }
  return obs;
}

void WritePpm(const RawImage& img, const std::string& path) {
  CheckDims(img);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << "P6\n" << kRawWidth << " " << kRawHeight << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (!f) throw IoError("write failed for " + path);
}

Observation Observe(const Environment& env) {
  return Preprocess(Render(env.state(), env.track(), env.params()));
}

}  // namespace laneforge
