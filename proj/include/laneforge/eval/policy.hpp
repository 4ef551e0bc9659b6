#pragma once

#include <memory>

#include "laneforge/expert/pure_pursuit.hpp"
#include "laneforge/nn/networks.hpp"
#include "laneforge/render/renderer.hpp"
#include "laneforge/sim/environment.hpp"

namespace laneforge {

// Maps what the robot sees (and, for privileged controllers, the simulator
// state) to an action. Instances are stateful and single-threaded.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void Reset() {}
  // When false the runner skips rendering and passes a null observation.
  virtual bool needs_observation() const { return true; }
  virtual Action Act(const Observation* obs, const Environment& env) = 0;
};

class ExpertPolicy : public Policy {
 public:
  explicit ExpertPolicy(PurePursuitConfig config = {}) : config_(config) { config_.Validate(); }
  void Reset() override { memory_ = {}; }
  bool needs_observation() const override { return false; }
  Action Act(const Observation* obs, const Environment& env) override;

 private:
  PurePursuitConfig config_;
  ExpertState memory_;
};

// Deterministic head of a trained network.
class NetPolicy : public Policy {
 public:
  explicit NetPolicy(nn::PolicyNet<float> net) : net_(std::move(net)) {}
  Action Act(const Observation* obs, const Environment& env) override;
  nn::PolicyNet<float>& net() { return net_; }

 private:
  nn::PolicyNet<float> net_;
};

class ConstantPolicy : public Policy {
 public:
  explicit ConstantPolicy(Action action) : action_(action) {}
  bool needs_observation() const override { return false; }
  Action Act(const Observation*, const Environment&) override { return action_; }

 private:
  Action action_;
};

}  // namespace laneforge
