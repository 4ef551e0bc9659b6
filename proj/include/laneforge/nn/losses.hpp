#pragma once

#include <cmath>
#include <numbers>

#include "laneforge/nn/tensor.hpp"

namespace laneforge::nn {

template <typename T>
struct LossGrad {
  double loss = 0.0;
  Mat<T> dz;
};

// Squared error between squashed predictions (sigmoid, tanh) and target
// actions, averaged over batch and both outputs. z, target: batch x 2.
template <typename T>
LossGrad<T> SquashedMse(const Mat<T>& z, const Mat<T>& target) {
  LossGrad<T> out;
  out.dz.resize(z.rows(), 2);
  const double scale = 1.0 / (2.0 * static_cast<double>(z.rows()));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double p0 = 1.0 / (1.0 + std::exp(-static_cast<double>(z(i, 0))));
    const double p1 = std::tanh(static_cast<double>(z(i, 1)));
    const double e0 = p0 - static_cast<double>(target(i, 0));
    const double e1 = p1 - static_cast<double>(target(i, 1));
    sum += e0 * e0 + e1 * e1;
    out.dz(i, 0) = static_cast<T>(2.0 * scale * e0 * p0 * (1.0 - p0));
    out.dz(i, 1) = static_cast<T>(2.0 * scale * e1 * (1.0 - p1 * p1));
  }
  out.loss = sum * scale;
  return out;
}

inline double Softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Mean binary cross-entropy on logits (batch x 1) against labels in {0, 1}.
template <typename T>
LossGrad<T> BceWithLogits(const Mat<T>& logits, const Mat<T>& labels) {
  LossGrad<T> out;
  out.dz.resize(logits.rows(), 1);
  const double n = static_cast<double>(logits.rows());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double z = logits(i, 0);
    const double y = labels(i, 0);
    sum += Softplus(z) - y * z;
    out.dz(i, 0) = static_cast<T>((1.0 / (1.0 + std::exp(-z)) - y) / n);
  }
  out.loss = sum / n;
  return out;
}

// Diagonal Gaussian over pre-squash outputs.
inline double GaussianLogProb(const double* u, const double* mean, const double* log_std, int dim) {
  double lp = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double s = std::exp(log_std[k]);
    const double e = (u[k] - mean[k]) / s;
    lp += -0.5 * e * e - log_std[k] - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return lp;
}

// d log p / d mean and d log p / d log_std for one sample and dimension.
inline void GaussianLogProbGrad(double u, double mean, double log_std, double* d_mean,
                                double* d_log_std) {
  const double var = std::exp(2.0 * log_std);
  const double e = u - mean;
  *d_mean = e / var;
  *d_log_std = e * e / var - 1.0;
}

}  // namespace laneforge::nn
