#include "laneforge/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "laneforge/errors.hpp"

namespace laneforge {

TrajectoryLog RunEpisode(Policy& policy, Environment& env, const EpisodeOptions& options) {
  const int saved = env.max_steps();
  env.set_max_steps(options.max_steps);
  TrajectoryLog log;
  try {
    ResetResult start = env.Reset(options.reset);
    policy.Reset();
    log.map = env.track().name();
    log.initial = start.state;
    log.dt = start.params.dt;
    log.steps.reserve(static_cast<size_t>(options.max_steps));
    bool done = options.max_steps <= 0;
    while (!done) {
      std::optional<Observation> obs;
      if (policy.needs_observation()) obs = Observe(env);
      const Action a = policy.Act(obs ? &*obs : nullptr, env);
      const StepResult r = env.Step(a);
      log.steps.push_back({r.state.t, r.state, r.lane_pose, a});
      log.done_reason = r.done_reason;
      done = r.done;
    }
  } catch (...) {
    env.set_max_steps(saved);
    throw;
  }
  env.set_max_steps(saved);
  return log;
}

MetricsReport ComputeMetrics(const TrajectoryLog& log, const TrackMap& track) {
  if (log.steps.empty()) throw EmptyLog("trajectory has no steps");
  MetricsReport m;
  const Vec2 start{log.initial.x, log.initial.y};
  const std::optional<LoopDirection> dir = track.DirectionOf(start, log.initial.heading);

  // Unwrapped arc position along the spawn lane, and the furthest point
  // reached so far. Only advances of the frontier made in the right lane
  // count; reversing or circling back never adds distance.
  std::optional<double> prev;
  int prev_loop = -1;
  double unwrapped = 0.0;
  double frontier = 0.0;
  double counted = 0.0;
  auto locate = [&](Vec2 p, int& loop) -> std::optional<double> {
    if (!dir) return std::nullopt;
    auto tile = track.TileAt(p.x, p.y);
    if (!tile || !IsDrivable(track.kind(*tile))) return std::nullopt;
    loop = track.LoopIndexOf(*tile);
    return track.LoopProgress(p, *dir);
  };
  prev = locate(start, prev_loop);

  for (const StepRecord& s : log.steps) {
    const LanePose& lp = s.lane_pose;
    const bool right_lane = lp.on_drivable && lp.in_right_lane;
    if (lp.on_drivable) m.lateral_deviation += std::abs(lp.d) * log.dt;
    if (!right_lane) m.major_infractions += log.dt;

    int loop = -1;
    const std::optional<double> p = locate({s.state.x, s.state.y}, loop);
    if (p && prev && loop == prev_loop) {
      const Loop& l = track.loops()[loop];
      const double len = *dir == LoopDirection::kForward ? l.forward_length : l.backward_length;
      double delta = *p - *prev;
      if (delta > 0.5 * len) delta -= len;
      if (delta < -0.5 * len) delta += len;
      unwrapped += delta;
      if (unwrapped > frontier) {
        if (right_lane) counted += unwrapped - frontier;
        frontier = unwrapped;
      }
    }
    if (p) {
      prev = p;
      prev_loop = loop;
    }
  }
  m.survival_time = log.steps.back().t;
  m.traveled_distance = std::floor(counted / track.tile_size());
  return m;
}

double Median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

EvalSummary Evaluate(Policy& policy, Environment& env, const EvalOptions& options,
                     std::vector<TrajectoryLog>* logs) {
  if (options.episodes <= 0) throw ConfigError("episodes must be positive");
  if (static_cast<int>(options.seeds.size()) != options.episodes) {
    throw ConfigError("seeds lists " + std::to_string(options.seeds.size()) + " values for " +
                      std::to_string(options.episodes) + " episodes");
  }
  EvalSummary summary;
  for (int e = 0; e < options.episodes; ++e) {
    EpisodeOptions ep;
    ep.max_steps = options.max_steps;
    ep.reset.domain_rand = options.domain_rand;
    ep.reset.seed = options.seeds[e];
    TrajectoryLog log = RunEpisode(policy, env, ep);
    summary.episodes.push_back(ComputeMetrics(log, env.track()));
    summary.maps.push_back(log.map);
    summary.done_reasons.push_back(log.done_reason);
    if (logs) logs->push_back(std::move(log));
  }
  auto column = [&](double MetricsReport::*field) {
    std::vector<double> v;
    for (const MetricsReport& m : summary.episodes) v.push_back(m.*field);
    return Median(std::move(v));
  };
  summary.median.survival_time = column(&MetricsReport::survival_time);
  summary.median.traveled_distance = column(&MetricsReport::traveled_distance);
  summary.median.lateral_deviation = column(&MetricsReport::lateral_deviation);
  summary.median.major_infractions = column(&MetricsReport::major_infractions);
  return summary;
}

std::string SummaryJson(const EvalSummary& summary, const std::string& config_hash, uint64_t seed) {
  auto metrics = [](const MetricsReport& m) {
    nlohmann::ordered_json j;
    j["survival_time"] = m.survival_time;
    j["traveled_distance"] = m.traveled_distance;
    j["lateral_deviation"] = m.lateral_deviation;
    j["major_infractions"] = m.major_infractions;
    return j;
  };
  nlohmann::ordered_json j = metrics(summary.median);
  j["per_episode"] = nlohmann::ordered_json::array();
  for (size_t i = 0; i < summary.episodes.size(); ++i) {
    nlohmann::ordered_json e = metrics(summary.episodes[i]);
    e["map"] = summary.maps[i];
    e["done_reason"] = ToString(summary.done_reasons[i]);
    j["per_episode"].push_back(e);
  }
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  return j.dump(2);
}

std::string SummaryText(const EvalSummary& summary) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << std::left << std::setw(10) << "episode" << std::setw(18) << "map" << std::right
      << std::setw(10) << "survival" << std::setw(10) << "distance" << std::setw(10) << "lat.dev"
      << std::setw(12) << "infractions" << "\n";
  auto row = [&](const std::string& label, const std::string& map, const MetricsReport& m) {
    out << std::left << std::setw(10) << label << std::setw(18) << map << std::right
        << std::setw(10) << m.survival_time << std::setw(10) << m.traveled_distance
        << std::setw(10) << m.lateral_deviation << std::setw(12) << m.major_infractions << "\n";
  };
  for (size_t i = 0; i < summary.episodes.size(); ++i) {
    row(std::to_string(i + 1), summary.maps[i], summary.episodes[i]);
  }
  row("median", "", summary.median);
  return out.str();
}

void WriteTrace(const TrajectoryLog& log, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << "t,x,y,d,phi\n" << std::setprecision(9);
  for (const StepRecord& s : log.steps) {
    f << s.t << "," << s.state.x << "," << s.state.y << "," << s.lane_pose.d << ","
      << s.lane_pose.phi << "\n";
  }
}

}  // namespace laneforge
