#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "laneforge/sim/types.hpp"

namespace laneforge {

enum class TileKind {
  kGrass,
  kStraightNS,
  kStraightEW,
  kCurveNE,
  kCurveNW,
  kCurveSE,
  kCurveSW,
};

enum class Side { kNorth, kEast, kSouth, kWest };

Side Opposite(Side s);
bool IsDrivable(TileKind kind);
bool IsCurve(TileKind kind);
std::string_view TileKindToken(TileKind kind);

struct TileCoord {
  int col = 0;
  int row = 0;  // row 0 is the northmost row
  bool operator==(const TileCoord&) const = default;
};

// A directed pass through one tile: the robot enters through `entry` and
// leaves through `exit`.
struct Traversal {
  TileCoord tile;
  Side entry = Side::kSouth;
  Side exit = Side::kNorth;

  Traversal Reversed() const { return {tile, exit, entry}; }
  bool operator==(const Traversal&) const = default;
};

// A point expressed relative to the right lane of a traversal.
struct LaneProjection {
  double along = 0.0;        // arc length along the right-lane centerline
  double lane_length = 0.0;  // right-lane arc length inside the tile
  double d = 0.0;            // offset from the right-lane centerline, + left
  double lateral = 0.0;      // offset from the road center line, + left
  double center_along = 0.0; // arc length along the road center line
  double tangent = 0.0;      // lane direction at the projected point
  double curvature = 0.0;    // signed, + for left turns
};

// One closed cycle of drivable tiles, in its canonical driving order.
struct Loop {
  std::vector<Traversal> tiles;
  std::vector<double> forward_offset;   // lane arc length before tile i
  std::vector<double> backward_offset;  // same, driving the loop reversed
  double forward_length = 0.0;
  double backward_length = 0.0;
};

// Which way around its loop a robot is driving.
enum class LoopDirection { kForward, kBackward };

// Immutable tile grid. World frame: x east, y north, origin at the south-west
// corner of the grid.
class TrackMap {
 public:
  TrackMap(std::string name, int width, int height, double tile_size,
           std::vector<TileKind> tiles);

  const std::string& name() const { return name_; }
  int width() const { return width_; }
  int height() const { return height_; }
  double tile_size() const { return tile_size_; }
  double lane_half_width() const { return tile_size_ / 4.0; }

  TileKind kind(TileCoord c) const;
  bool InBounds(TileCoord c) const;
  std::optional<TileCoord> TileAt(double x, double y) const;
  Vec2 TileOrigin(TileCoord c) const;
  int DrivableCount() const;

  const std::vector<Loop>& loops() const { return loops_; }
  int LoopIndexOf(TileCoord c) const;
  int LoopPositionOf(TileCoord c) const;

  // Traversal of `c` in its loop's canonical order.
  Traversal CanonicalTraversal(TileCoord c) const;
  Traversal Next(const Traversal& t) const;

  LaneProjection Project(const Traversal& t, Vec2 world) const;
  Vec2 LanePoint(const Traversal& t, double along) const;

  // Picks the traversal of the tile under `world` whose lane direction agrees
  // with `heading`. Empty when the point is not on a drivable tile.
  std::optional<Traversal> AlignedTraversal(Vec2 world, double heading) const;

  // Arc-length position of `world` along a loop's right lane in `dir`.
  std::optional<double> LoopProgress(Vec2 world, LoopDirection dir) const;
  std::optional<LoopDirection> DirectionOf(Vec2 world, double heading) const;

 private:
  void BuildLoops();

  std::string name_;
  int width_;
  int height_;
  double tile_size_;
  std::vector<TileKind> tiles_;
  std::vector<Loop> loops_;
  std::vector<int> loop_index_;
  std::vector<int> loop_position_;
};

// Parses the line-oriented map format:
//   # comment
//   tile_size: 0.585
//   CurveSE, Straight_EW, CurveSW
//   ...
// Throws ParseError or DisconnectedTrack.
TrackMap LoadMap(std::string_view source, std::string name = "map");
TrackMap LoadMapFile(const std::string& path);

// Names of the maps compiled into the library.
std::vector<std::string> BundledMapNames();
std::vector<std::string> TrainingMapNames();
std::string HeldOutMapName();
std::string_view BundledMapSource(std::string_view name);
std::shared_ptr<const TrackMap> LoadBundledMap(std::string_view name);
// Accepts a bundled map name or a file path.
std::shared_ptr<const TrackMap> ResolveMap(const std::string& name_or_path);

LanePose ComputeLanePose(const TrackMap& track, const RobotState& pose);

}  // namespace laneforge
