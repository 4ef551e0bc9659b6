#pragma once

#include <cmath>
#include <random>
#include <string>

#include "laneforge/nn/kernels.hpp"
#include "laneforge/nn/tensor.hpp"

namespace laneforge::nn {

// Uniform He initialization: U(-sqrt(6/fan_in), sqrt(6/fan_in)). Draws in
// double so float and double networks built from one seed agree.
template <typename T>
void HeUniform(Tensor<T>& t, int fan_in, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (T& v : t.values()) v = static_cast<T>(dist(rng));
}

template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(const std::string& name, ConvShape shape)
      : shape_(shape),
        weight_(name + ".weight", {shape.out_c, shape.in_c, shape.kernel, shape.kernel}),
        bias_(name + ".bias", {shape.out_c}) {}

  void Init(std::mt19937_64& rng) {
    HeUniform(weight_.value, shape_.patch(), rng);
    bias_.value.Fill(T(0));
  }

  const Mat<T>& Forward(const Mat<T>& x) {
    out_.resize(x.rows(), shape_.out_size());
    Conv2dForward(shape_, static_cast<int>(x.rows()), x.data(), weight_.value.data(),
                  bias_.value.data(), out_.data(), cols_);
    return out_;
  }

  // Accumulates parameter gradients; returns dx when requested.
  Mat<T> Backward(const Mat<T>& dy, bool need_dx) {
    Mat<T> dx;
    if (need_dx) dx.resize(dy.rows(), shape_.in_size());
    Conv2dBackward(shape_, static_cast<int>(dy.rows()), cols_, weight_.value.data(),
                   dy.data(), weight_.grad.data(), bias_.grad.data(),
                   need_dx ? dx.data() : nullptr);
    return dx;
  }

  const ConvShape& shape() const { return shape_; }
  void AppendParameters(ParamList<T>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

 private:
  ConvShape shape_;
  Param<T> weight_;
  Param<T> bias_;
  Mat<T> cols_;
  Mat<T> out_;
};

template <typename T>
class Dense {
 public:
  Dense() = default;
  Dense(const std::string& name, int in, int out)
      : in_(in), out_(out), weight_(name + ".weight", {out, in}), bias_(name + ".bias", {out}) {}

  void Init(std::mt19937_64& rng) {
    HeUniform(weight_.value, in_, rng);
    bias_.value.Fill(T(0));
  }

  const Mat<T>& Forward(const Mat<T>& x) {
    input_ = x;
    y_.resize(x.rows(), out_);
    DenseForward(static_cast<int>(x.rows()), in_, out_, input_.data(), weight_.value.data(),
                 bias_.value.data(), y_.data());
    return y_;
  }

  Mat<T> Backward(const Mat<T>& dy, bool need_dx) {
    Mat<T> dx;
    if (need_dx) dx.resize(dy.rows(), in_);
    DenseBackward(static_cast<int>(dy.rows()), in_, out_, input_.data(), weight_.value.data(),
                  dy.data(), weight_.grad.data(), bias_.grad.data(),
                  need_dx ? dx.data() : nullptr);
    return dx;
  }

  int in() const { return in_; }
  int out() const { return out_; }
  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }
  void AppendParameters(ParamList<T>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

 private:
  int in_ = 0;
  int out_ = 0;
  Param<T> weight_;
  Param<T> bias_;
  Mat<T> input_;
  Mat<T> y_;
};

template <typename T>
class Relu {
 public:
  const Mat<T>& Forward(const Mat<T>& x) {
    y_ = x.cwiseMax(T(0));
    return y_;
  }
  Mat<T> Backward(const Mat<T>& dy) const {
    return (y_.array() > T(0)).select(dy, T(0));
  }
  // Sign pattern of the last forward pass.
  void AppendPattern(std::vector<bool>& out) const {
    for (Eigen::Index i = 0; i < y_.size(); ++i) out.push_back(y_.data()[i] > T(0));
  }

 private:
  Mat<T> y_;
};

}  // namespace laneforge::nn
