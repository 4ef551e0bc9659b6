#pragma once

#include <span>
#include <vector>

#include "laneforge/nn/networks.hpp"
#include "laneforge/render/renderer.hpp"

namespace laneforge::nn {

// HWC observation -> one CHW row.
template <typename T>
void PackObservation(const float* hwc, T* chw) {
  constexpr int kPlane = kObsHeight * kObsWidth;
  for (int p = 0; p < kPlane; ++p) {
    for (int c = 0; c < kChannels; ++c) chw[c * kPlane + p] = static_cast<T>(hwc[p * kChannels + c]);
  }
}

template <typename T>
Mat<T> PackBatch(std::span<const Observation* const> obs) {
  Mat<T> x(static_cast<Eigen::Index>(obs.size()), kObsSize);
  for (size_t i = 0; i < obs.size(); ++i) {
    PackObservation(obs[i]->values.data(), x.row(static_cast<Eigen::Index>(i)).data());
  }
  return x;
}

template <typename T>
Mat<T> PackBatch(const Observation& obs) {
  const Observation* p = &obs;
  return PackBatch<T>(std::span<const Observation* const>(&p, 1));
}

// Deterministic head: squashed means.
template <typename T>
Action ForwardPolicy(PolicyNet<T>& net, const Observation& obs) {
  const Mat<T>& z = net.Forward(PackBatch<T>(obs));
  return SquashAction(z(0, 0), z(0, 1));
}

struct GaussianHead {
  double mean[2];
  double log_std[2];
};

template <typename T>
GaussianHead ForwardPolicyStochastic(PolicyNet<T>& net, const Observation& obs) {
  const Mat<T>& z = net.Forward(PackBatch<T>(obs));
  GaussianHead g;
  for (int k = 0; k < 2; ++k) {
    g.mean[k] = z(0, k);
    g.log_std[k] = net.log_std().value[k];
  }
  return g;
}

}  // namespace laneforge::nn
