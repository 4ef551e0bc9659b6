#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "laneforge/eval/policy.hpp"
#include "laneforge/sim/environment.hpp"

namespace laneforge {

struct StepRecord {
  double t = 0.0;
  RobotState state;
  LanePose lane_pose;
  Action action;  // action that produced this state
};

struct TrajectoryLog {
  std::string map;
  RobotState initial;
  double dt = 0.0;
  std::vector<StepRecord> steps;
  DoneReason done_reason = DoneReason::kRunning;
};

struct MetricsReport {
  double survival_time = 0.0;       // s
  double traveled_distance = 0.0;   // whole tiles of right-lane progress
  double lateral_deviation = 0.0;   // m*s
  double major_infractions = 0.0;   // s
  bool operator==(const MetricsReport&) const = default;
};

struct EpisodeOptions {
  int max_steps = kEvalEpisodeSteps;
  ResetOptions reset;
};

// Resets with options.reset and steps the policy until done.
TrajectoryLog RunEpisode(Policy& policy, Environment& env, const EpisodeOptions& options);

// Throws EmptyLog on a log without steps.
MetricsReport ComputeMetrics(const TrajectoryLog& log, const TrackMap& track);

struct EvalOptions {
  int episodes = 5;
  std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
  int max_steps = kEvalEpisodeSteps;
  bool domain_rand = false;
};

struct EvalSummary {
  std::vector<MetricsReport> episodes;
  std::vector<std::string> maps;
  std::vector<DoneReason> done_reasons;
  MetricsReport median;
  bool operator==(const EvalSummary&) const = default;
};

// Arithmetic median; mean of the middle two for even counts.
double Median(std::vector<double> values);

EvalSummary Evaluate(Policy& policy, Environment& env, const EvalOptions& options,
                     std::vector<TrajectoryLog>* logs = nullptr);

// Median columns plus a per_episode array.
std::string SummaryJson(const EvalSummary& summary, const std::string& config_hash = "",
                        uint64_t seed = 0);
std::string SummaryText(const EvalSummary& summary);

// Per-step t,x,y,d,phi.
void WriteTrace(const TrajectoryLog& log, const std::string& path);

}  // namespace laneforge
