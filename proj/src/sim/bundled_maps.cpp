#include <array>
#include <string_view>

#include "laneforge/errors.hpp"
#include "laneforge/sim/track_map.hpp"

namespace laneforge {
namespace {

struct BundledMap {
  std::string_view name;
  std::string_view source;
  bool training;
};

constexpr std::string_view kLoopSquare = R"(# smallest closed loop
tile_size: 0.585
CurveSE, Straight_EW, CurveSW
Straight_NS, Grass, Straight_NS
CurveNE, Straight_EW, CurveNW
)";

// L-shaped loop: one concave corner gives curves of both chiralities.
constexpr std::string_view kLoopObstaclesFree = R"(tile_size: 0.585
CurveSE, Straight_EW, CurveSW, Grass, Grass
Straight_NS, Grass, CurveNE, Straight_EW, CurveSW
Straight_NS, Grass, Grass, Grass, Straight_NS
CurveNE, Straight_EW, Straight_EW, Straight_EW, CurveNW
)";

constexpr std::string_view kLoopNotch = R"(tile_size: 0.585
CurveSE, Straight_EW, CurveSW, CurveSE, Straight_EW, CurveSW
Straight_NS, Grass, CurveNE, CurveNW, Grass, Straight_NS
Straight_NS, Grass, Grass, Grass, Grass, Straight_NS
CurveNE, Straight_EW, Straight_EW, Straight_EW, Straight_EW, CurveNW
)";

// Evaluation only; never used for demonstrations.
constexpr std::string_view kHeldOut = R"(tile_size: 0.585
Grass, CurveSE, Straight_EW, CurveSW
CurveSE, CurveNW, Grass, Straight_NS
Straight_NS, Grass, Grass, Straight_NS
CurveNE, Straight_EW, Straight_EW, CurveNW
)";

constexpr std::array<BundledMap, 4> kMaps = {{
    {"loop_square", kLoopSquare, true},
    {"loop_obstacles_free", kLoopObstaclesFree, true},
    {"loop_notch", kLoopNotch, true},
    {"heldout_hook", kHeldOut, false},
}};

}  // namespace

std::vector<std::string> BundledMapNames() {
  std::vector<std::string> out;
  for (const auto& m : kMaps) out.emplace_back(m.name);
  return out;
}

std::vector<std::string> TrainingMapNames() {
  std::vector<std::string> out;
  for (const auto& m : kMaps) {
    if (m.training) out.emplace_back(m.name);
  }
  return out;
}

std::string HeldOutMapName() { return "heldout_hook"; }

std::string_view BundledMapSource(std::string_view name) {
  for (const auto& m : kMaps) {
    if (m.name == name) return m.source;
  }
  throw ParseError("no bundled map named '" + std::string(name) + "'");
}

std::shared_ptr<const TrackMap> LoadBundledMap(std::string_view name) {
  return std::make_shared<const TrackMap>(
      LoadMap(BundledMapSource(name), std::string(name)));
}

std::shared_ptr<const TrackMap> ResolveMap(const std::string& name_or_path) {
  for (const auto& m : kMaps) {
    if (m.name == name_or_path) return LoadBundledMap(m.name);
  }
  return std::make_shared<const TrackMap>(LoadMapFile(name_or_path));
}

}  // namespace laneforge
