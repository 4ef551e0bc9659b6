#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "laneforge/expert/pure_pursuit.hpp"
#include "laneforge/il/gail.hpp"
#include "laneforge/il/train_bc.hpp"
#include "laneforge/sim/domain_rand.hpp"

namespace laneforge {

struct CollectSection {
  int episodes = 16;
  int steps_per_episode = 512;
};

struct DaggerSection {
  int iterations = 4;
  int episodes_per_iter = 2;
  int steps_per_episode = 512;
};

struct GailSection {
  GailOptions options;
  int buffer_trajectories = kBufferTrajectories;
};

struct EvalSection {
  int episodes = 5;
  std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
  int max_steps = kEvalEpisodeSteps;
};

// Everything a subcommand needs. Sections of the file map one-to-one onto
// the members below; see configs/README.md for the grammar.
struct RunConfig {
  uint64_t seed = 1;
  std::string out_dir = "runs/default";
  std::vector<std::string> train_maps{"loop_square", "loop_obstacles_free", "loop_notch"};
  std::vector<std::string> eval_maps{"heldout_hook"};
  DomainRandConfig domain_rand;
  PurePursuitConfig expert;
  CollectSection collect;
  TrainConfig train;
  DaggerSection dagger;
  GailSection gail;
  EvalSection eval;

  // Throws ConfigError naming the first offending field.
  void Validate() const;
};

// Keys absent from the file keep their defaults; unknown sections or keys
// are rejected.
RunConfig ParseRunConfig(const std::string& text);
RunConfig LoadRunConfig(const std::string& path);

// One `section.key = value` line per field, doubles printed round-trip exact.
std::string CanonicalConfig(const RunConfig& config);
// CRC32 of the canonical form without run.out_dir, 8 hex digits.
std::string ConfigHash(const RunConfig& config);

// Record and pair counts the config implies.
size_t CollectBudget(const RunConfig& config);
size_t DaggerBudget(const RunConfig& config);  // initial demos plus all rounds
size_t BufferPairBudget(const RunConfig& config);

// Stream seeds derived from the run seed, one per pipeline stage.
enum class SeedStream : uint64_t {
  kCollect = 1,
  kSplit,
  kTrain,
  kDagger,
  kGail,
  kPolicyInit,
  kDiscInit,
};
uint64_t StageSeed(const RunConfig& config, SeedStream stream);

}  // namespace laneforge
