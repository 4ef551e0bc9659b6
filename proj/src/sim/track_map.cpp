#include "laneforge/sim/track_map.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "laneforge/errors.hpp"

namespace laneforge {
namespace {

using std::numbers::pi;

std::array<Side, 2> Connections(TileKind kind) {
  switch (kind) {
    case TileKind::kStraightNS: return {Side::kNorth, Side::kSouth};
    case TileKind::kStraightEW: return {Side::kEast, Side::kWest};
    case TileKind::kCurveNE: return {Side::kNorth, Side::kEast};
    case TileKind::kCurveNW: return {Side::kNorth, Side::kWest};
    case TileKind::kCurveSE: return {Side::kSouth, Side::kEast};
    case TileKind::kCurveSW: return {Side::kSouth, Side::kWest};
    case TileKind::kGrass: break;
  }
  return {Side::kNorth, Side::kNorth};
}

bool Connects(TileKind kind, Side s) {
  if (!IsDrivable(kind)) return false;
  auto c = Connections(kind);
  return c[0] == s || c[1] == s;
}

TileCoord Neighbor(TileCoord c, Side s) {
  switch (s) {
    case Side::kNorth: return {c.col, c.row - 1};
    case Side::kSouth: return {c.col, c.row + 1};
    case Side::kEast: return {c.col + 1, c.row};
    case Side::kWest: return {c.col - 1, c.row};
  }
  return c;
}

Vec2 SideMidpoint(Side s, double t) {
  switch (s) {
    case Side::kNorth: return {t / 2, t};
    case Side::kSouth: return {t / 2, 0};
    case Side::kEast: return {t, t / 2};
    case Side::kWest: return {0, t / 2};
  }
  return {};
}

Vec2 CornerOf(Side a, Side b, double t) {
  bool east = a == Side::kEast || b == Side::kEast;
  bool north = a == Side::kNorth || b == Side::kNorth;
  return {east ? t : 0.0, north ? t : 0.0};
}

struct CurveFrame {
  Vec2 corner;
  double entry_angle;
  double sweep;  // +1 counter-clockwise (left turn), -1 clockwise
  double lane_radius;
};

CurveFrame CurveGeometry(const Traversal& tr, double t) {
  CurveFrame f;
  f.corner = CornerOf(tr.entry, tr.exit, t);
  Vec2 in = SideMidpoint(tr.entry, t);
  Vec2 out = SideMidpoint(tr.exit, t);
  f.entry_angle = std::atan2(in.y - f.corner.y, in.x - f.corner.x);
  double exit_angle = std::atan2(out.y - f.corner.y, out.x - f.corner.x);
  f.sweep = NormalizeAngle(exit_angle - f.entry_angle) > 0 ? 1.0 : -1.0;
  f.lane_radius = f.sweep > 0 ? 0.75 * t : 0.25 * t;
  return f;
}

TileKind ParseToken(std::string_view tok) {
  static constexpr std::array<TileKind, 7> kAll = {
      TileKind::kGrass,   TileKind::kStraightNS, TileKind::kStraightEW,
      TileKind::kCurveNE, TileKind::kCurveNW,    TileKind::kCurveSE,
      TileKind::kCurveSW};
  for (TileKind k : kAll) {
    if (TileKindToken(k) == tok) return k;
  }
  throw ParseError("unknown tile token '" + std::string(tok) + "'");
}

std::string_view Trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

const char* ToString(DoneReason reason) {
  switch (reason) {
    case DoneReason::kRunning: return "Running";
    case DoneReason::kOffRoad: return "OffRoad";
    case DoneReason::kTimeLimit: return "TimeLimit";
  }
  return "?";
}

Side Opposite(Side s) {
  switch (s) {
    case Side::kNorth: return Side::kSouth;
    case Side::kSouth: return Side::kNorth;
    case Side::kEast: return Side::kWest;
    case Side::kWest: return Side::kEast;
  }
  return s;
}

bool IsDrivable(TileKind kind) { return kind != TileKind::kGrass; }

bool IsCurve(TileKind kind) {
  return kind == TileKind::kCurveNE || kind == TileKind::kCurveNW ||
         kind == TileKind::kCurveSE || kind == TileKind::kCurveSW;
}

std::string_view TileKindToken(TileKind kind) {
  switch (kind) {
    case TileKind::kGrass: return "Grass";
    case TileKind::kStraightNS: return "Straight_NS";
    case TileKind::kStraightEW: return "Straight_EW";
    case TileKind::kCurveNE: return "CurveNE";
    case TileKind::kCurveNW: return "CurveNW";
    case TileKind::kCurveSE: return "CurveSE";
    case TileKind::kCurveSW: return "CurveSW";
  }
  return "?";
}

TrackMap::TrackMap(std::string name, int width, int height, double tile_size,
                   std::vector<TileKind> tiles)
    : name_(std::move(name)),
      width_(width),
      height_(height),
      tile_size_(tile_size),
      tiles_(std::move(tiles)) {
  if (width_ <= 0 || height_ <= 0 ||
      tiles_.size() != static_cast<size_t>(width_) * height_) {
    throw ParseError("grid must be nonempty and rectangular");
  }
  if (!(tile_size_ > 0.0) || !std::isfinite(tile_size_)) {
    throw ParseError("tile_size must be positive");
  }
  for (int row = 0; row < height_; ++row) {
    for (int col = 0; col < width_; ++col) {
      TileCoord c{col, row};
      TileKind k = kind(c);
      if (!IsDrivable(k)) continue;
      for (Side s : Connections(k)) {
        TileCoord n = Neighbor(c, s);
        if (!InBounds(n) || !Connects(kind(n), Opposite(s))) {
          throw DisconnectedTrack(
              "tile (" + std::to_string(col) + "," + std::to_string(row) + ") " +
              std::string(TileKindToken(k)) + " has no matching neighbor");
        }
      }
    }
  }
  if (DrivableCount() == 0) throw DisconnectedTrack("map has no closed loop");
  BuildLoops();
}

TileKind TrackMap::kind(TileCoord c) const {
  if (!InBounds(c)) return TileKind::kGrass;
  return tiles_[static_cast<size_t>(c.row) * width_ + c.col];
}

bool TrackMap::InBounds(TileCoord c) const {
  return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
}

std::optional<TileCoord> TrackMap::TileAt(double x, double y) const {
  if (!(x >= 0.0 && y >= 0.0)) return std::nullopt;
  int col = static_cast<int>(std::floor(x / tile_size_));
  int from_south = static_cast<int>(std::floor(y / tile_size_));
  TileCoord c{col, height_ - 1 - from_south};
  if (!InBounds(c)) return std::nullopt;
  return c;
}

Vec2 TrackMap::TileOrigin(TileCoord c) const {
  return {c.col * tile_size_, (height_ - 1 - c.row) * tile_size_};
}

int TrackMap::DrivableCount() const {
  int n = 0;
  for (TileKind k : tiles_) n += IsDrivable(k) ? 1 : 0;
  return n;
}

int TrackMap::LoopIndexOf(TileCoord c) const {
  return InBounds(c) ? loop_index_[static_cast<size_t>(c.row) * width_ + c.col]
                     : -1;
}

int TrackMap::LoopPositionOf(TileCoord c) const {
  return InBounds(c)
             ? loop_position_[static_cast<size_t>(c.row) * width_ + c.col]
             : -1;
}

Traversal TrackMap::CanonicalTraversal(TileCoord c) const {
  return loops_[LoopIndexOf(c)].tiles[LoopPositionOf(c)];
}

Traversal TrackMap::Next(const Traversal& t) const {
  TileCoord n = Neighbor(t.tile, t.exit);
  Side entry = Opposite(t.exit);
  auto conn = Connections(kind(n));
  return {n, entry, conn[0] == entry ? conn[1] : conn[0]};
}

void TrackMap::BuildLoops() {
  const size_t n = tiles_.size();
  loop_index_.assign(n, -1);
  loop_position_.assign(n, -1);
  for (int row = 0; row < height_; ++row) {
    for (int col = 0; col < width_; ++col) {
      TileCoord start{col, row};
      size_t idx = static_cast<size_t>(row) * width_ + col;
      if (!IsDrivable(kind(start)) || loop_index_[idx] >= 0) continue;
      auto conn = Connections(kind(start));
      Loop loop;
      Traversal t{start, conn[0], conn[1]};
      const int id = static_cast<int>(loops_.size());
      do {
        size_t i = static_cast<size_t>(t.tile.row) * width_ + t.tile.col;
        loop_index_[i] = id;
        loop_position_[i] = static_cast<int>(loop.tiles.size());
        loop.tiles.push_back(t);
        t = Next(t);
      } while (!(t.tile == start));

      const size_t m = loop.tiles.size();
      loop.forward_offset.resize(m);
      loop.backward_offset.resize(m);
      double acc = 0.0;
      for (size_t i = 0; i < m; ++i) {
        loop.forward_offset[i] = acc;
        acc += Project(loop.tiles[i], TileOrigin(loop.tiles[i].tile)).lane_length;
      }
      loop.forward_length = acc;
      acc = 0.0;
      for (size_t k = m; k-- > 0;) {
        loop.backward_offset[k] = acc;
        Traversal r = loop.tiles[k].Reversed();
        acc += Project(r, TileOrigin(r.tile)).lane_length;
      }
      loop.backward_length = acc;
      loops_.push_back(std::move(loop));
    }
  }
}

LaneProjection TrackMap::Project(const Traversal& tr, Vec2 world) const {
  const double t = tile_size_;
  Vec2 o = TileOrigin(tr.tile);
  Vec2 p{world.x - o.x, world.y - o.y};
  LaneProjection out;
  if (!IsCurve(kind(tr.tile))) {
    Vec2 in = SideMidpoint(tr.entry, t);
    Vec2 exit = SideMidpoint(tr.exit, t);
    Vec2 u{(exit.x - in.x) / t, (exit.y - in.y) / t};
    Vec2 rel{p.x - in.x, p.y - in.y};
    out.along = rel.x * u.x + rel.y * u.y;
    out.center_along = out.along;
    out.lateral = -rel.x * u.y + rel.y * u.x;
    out.d = out.lateral + 0.25 * t;
    out.lane_length = t;
    out.tangent = std::atan2(u.y, u.x);
    out.curvature = 0.0;
    return out;
  }
  CurveFrame f = CurveGeometry(tr, t);
  Vec2 rel{p.x - f.corner.x, p.y - f.corner.y};
  double r = std::sqrt(rel.x * rel.x + rel.y * rel.y);
  double theta = std::atan2(rel.y, rel.x);
  double delta = std::clamp(NormalizeAngle(theta - f.entry_angle) * f.sweep, 0.0,
                            pi / 2);
  double theta_c = f.entry_angle + f.sweep * delta;
  out.lateral = f.sweep > 0 ? 0.5 * t - r : r - 0.5 * t;
  out.d = out.lateral + 0.25 * t;
  out.along = delta * f.lane_radius;
  out.center_along = delta * 0.5 * t;
  out.lane_length = 0.5 * pi * f.lane_radius;
  out.tangent = NormalizeAngle(theta_c + f.sweep * pi / 2);
  out.curvature = f.sweep / f.lane_radius;
  return out;
}

Vec2 TrackMap::LanePoint(const Traversal& tr, double along) const {
  const double t = tile_size_;
  Vec2 o = TileOrigin(tr.tile);
  if (!IsCurve(kind(tr.tile))) {
    Vec2 in = SideMidpoint(tr.entry, t);
    Vec2 exit = SideMidpoint(tr.exit, t);
    Vec2 u{(exit.x - in.x) / t, (exit.y - in.y) / t};
    // right-lane centerline sits a quarter tile to the right of the center line
    return {o.x + in.x + along * u.x + 0.25 * t * u.y,
            o.y + in.y + along * u.y - 0.25 * t * u.x};
  }
  CurveFrame f = CurveGeometry(tr, t);
  double theta = f.entry_angle + f.sweep * along / f.lane_radius;
  return {o.x + f.corner.x + f.lane_radius * std::cos(theta),
          o.y + f.corner.y + f.lane_radius * std::sin(theta)};
}

std::optional<Traversal> TrackMap::AlignedTraversal(Vec2 world,
                                                    double heading) const {
  auto tile = TileAt(world.x, world.y);
  if (!tile || !IsDrivable(kind(*tile))) return std::nullopt;
  Traversal canon = CanonicalTraversal(*tile);
  LaneProjection p = Project(canon, world);
  return std::cos(heading - p.tangent) >= 0.0 ? canon : canon.Reversed();
}

std::optional<LoopDirection> TrackMap::DirectionOf(Vec2 world,
                                                   double heading) const {
  auto tr = AlignedTraversal(world, heading);
  if (!tr) return std::nullopt;
  return *tr == CanonicalTraversal(tr->tile) ? LoopDirection::kForward
                                             : LoopDirection::kBackward;
}

std::optional<double> TrackMap::LoopProgress(Vec2 world, LoopDirection dir) const {
  auto tile = TileAt(world.x, world.y);
  if (!tile || !IsDrivable(kind(*tile))) return std::nullopt;
  const Loop& loop = loops_[LoopIndexOf(*tile)];
  int pos = LoopPositionOf(*tile);
  Traversal canon = loop.tiles[pos];
  if (dir == LoopDirection::kForward) {
    return loop.forward_offset[pos] + Project(canon, world).along;
  }
  return loop.backward_offset[pos] + Project(canon.Reversed(), world).along;
}

LanePose ComputeLanePose(const TrackMap& track, const RobotState& pose) {
  LanePose lp;
  Vec2 p{pose.x, pose.y};
  auto tr = track.AlignedTraversal(p, pose.heading);
  if (!tr) return lp;
  LaneProjection proj = track.Project(*tr, p);
  lp.d = proj.d;
  lp.phi = NormalizeAngle(pose.heading - proj.tangent);
  lp.curvature = proj.curvature;
  lp.on_drivable = std::abs(proj.lateral) <= 0.5 * track.tile_size();
  lp.in_right_lane = lp.on_drivable && std::abs(lp.d) < track.lane_half_width();
  return lp;
}

TrackMap LoadMap(std::string_view source, std::string name) {
  double tile_size = 0.585;
  std::vector<std::vector<TileKind>> rows;
  std::istringstream in{std::string(source)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    constexpr std::string_view kHeader = "tile_size:";
    if (line.starts_with(kHeader)) {
      std::string value(Trim(line.substr(kHeader.size())));
      try {
        size_t used = 0;
        tile_size = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": bad tile_size '" + value + "'");
      }
      if (!(tile_size > 0.0)) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": tile_size must be positive");
      }
      continue;
    }
    std::vector<TileKind> row;
    size_t start = 0;
    while (true) {
      size_t comma = line.find(',', start);
      std::string_view tok =
          Trim(line.substr(start, comma == std::string_view::npos
                                      ? std::string_view::npos
                                      : comma - start));
      try {
        row.push_back(ParseToken(tok));
      } catch (const ParseError& e) {
        throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
      }
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": row width differs from the first row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("map has no tile rows");
  std::vector<TileKind> tiles;
  for (auto& r : rows) tiles.insert(tiles.end(), r.begin(), r.end());
  return TrackMap(std::move(name), static_cast<int>(rows.front().size()),
                  static_cast<int>(rows.size()), tile_size, std::move(tiles));
}

TrackMap LoadMapFile(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open map file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos) {
    stem = stem.substr(slash + 1);
  }
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos) {
    stem = stem.substr(0, dot);
  }
  return LoadMap(ss.str(), stem);
}

}  // namespace laneforge
