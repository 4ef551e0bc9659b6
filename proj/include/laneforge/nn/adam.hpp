#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "laneforge/errors.hpp"
#include "laneforge/nn/tensor.hpp"

namespace laneforge::nn {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment buffers for one parameter list, matched by position.
template <typename T>
class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig config) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  int64_t step() const { return step_; }

  // Bias-corrected update of every parameter from its gradient buffer.
  void Step(const ParamList<T>& params) {
    if (first_.empty()) {
      for (const Param<T>* p : params) {
        first_.emplace_back(p->value.shape());
        second_.emplace_back(p->value.shape());
      }
    }
    if (first_.size() != params.size()) {
      throw ShapeMismatch("optimizer tracks " + std::to_string(first_.size()) +
                          " tensors, got " + std::to_string(params.size()));
    }
    for (size_t i = 0; i < params.size(); ++i) {
      if (params[i]->value.shape() != first_[i].shape() ||
          params[i]->grad.shape() != first_[i].shape()) {
        throw ShapeMismatch("shape of " + params[i]->name + " changed");
      }
    }
    ++step_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    const T b1 = static_cast<T>(config_.beta1);
    const T b2 = static_cast<T>(config_.beta2);
    for (size_t i = 0; i < params.size(); ++i) {
      T* w = params[i]->value.data();
      const T* g = params[i]->grad.data();
      T* m = first_[i].data();
      T* v = second_[i].data();
      const size_t n = params[i]->value.size();
      for (size_t k = 0; k < n; ++k) {
        m[k] = b1 * m[k] + (T(1) - b1) * g[k];
        v[k] = b2 * v[k] + (T(1) - b2) * g[k] * g[k];
        const double m_hat = m[k] / c1;
        const double v_hat = v[k] / c2;
        w[k] -= static_cast<T>(config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps));
      }
    }
  }

 private:
  AdamConfig config_;
  int64_t step_ = 0;
  std::vector<Tensor<T>> first_;
  std::vector<Tensor<T>> second_;
};

}  // namespace laneforge::nn
