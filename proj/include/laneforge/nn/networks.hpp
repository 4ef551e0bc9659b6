#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "laneforge/errors.hpp"
#include "laneforge/nn/layers.hpp"
#include "laneforge/nn/tensor.hpp"
#include "laneforge/sim/types.hpp"

namespace laneforge::nn {

// Topology shared by the policy and the discriminator.
struct NetSpec {
  int channels = 3;
  int height = 60;
  int width = 80;
  int conv1 = 8;
  int conv2 = 16;
  int kernel = 5;
  int stride = 2;
  int hidden1 = 128;
  int hidden2 = 64;

  int input_size() const { return channels * height * width; }
  bool operator==(const NetSpec&) const = default;
};

template <typename T>
void CheckFinite(const Mat<T>& m, const char* where) {
  if (!m.allFinite()) throw NonFiniteActivation(std::string("non-finite values in ") + where);
}

// conv(stride) -> ReLU -> conv(stride) -> ReLU -> flatten
template <typename T>
class Encoder {
 public:
  Encoder() = default;
  Encoder(const std::string& prefix, const NetSpec& spec) {
    ConvShape c1{spec.channels, spec.height, spec.width, spec.conv1, spec.kernel, spec.stride};
    ConvShape c2{spec.conv1, c1.out_h(), c1.out_w(), spec.conv2, spec.kernel, spec.stride};
    conv1_ = Conv2d<T>(prefix + ".conv1", c1);
    conv2_ = Conv2d<T>(prefix + ".conv2", c2);
  }

  void Init(std::mt19937_64& rng) {
    conv1_.Init(rng);
    conv2_.Init(rng);
  }
  int feature_size() const { return conv2_.shape().out_size(); }

  const Mat<T>& Forward(const Mat<T>& x) {
    const Mat<T>& h = relu1_.Forward(conv1_.Forward(x));
    return relu2_.Forward(conv2_.Forward(h));
  }
  void Backward(const Mat<T>& d_features) {
    Mat<T> d = conv2_.Backward(relu2_.Backward(d_features), true);
    conv1_.Backward(relu1_.Backward(d), false);
  }
  void AppendParameters(ParamList<T>& out) {
    conv1_.AppendParameters(out);
    conv2_.AppendParameters(out);
  }
  void AppendPattern(std::vector<bool>& out) const {
    relu1_.AppendPattern(out);
    relu2_.AppendPattern(out);
  }

 private:
  Conv2d<T> conv1_;
  Relu<T> relu1_;
  Conv2d<T> conv2_;
  Relu<T> relu2_;
};

inline double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Squashing heads: throttle = sigmoid(z0), steering = tanh(z1).
inline Action SquashAction(double z_throttle, double z_steering) {
  return Action(Sigmoid(z_throttle), std::tanh(z_steering));
}

// Image -> pre-squash action means (2 columns), plus a learned log standard
// deviation for the stochastic head.
template <typename T>
class PolicyNet {
 public:
  PolicyNet() : PolicyNet(NetSpec{}, 0) {}
  PolicyNet(const NetSpec& spec, uint64_t seed, double init_log_std = -1.5)
      : spec_(spec),
        encoder_("policy.encoder", spec),
        fc1_("policy.fc1", encoder_.feature_size(), spec.hidden1),
        fc2_("policy.fc2", spec.hidden1, spec.hidden2),
        head_("policy.head", spec.hidden2, 2),
        log_std_("policy.log_std", {2}) {
    std::mt19937_64 rng(seed);
    encoder_.Init(rng);
    fc1_.Init(rng);
    fc2_.Init(rng);
    head_.Init(rng);
    log_std_.value.Fill(static_cast<T>(init_log_std));
  }

  const NetSpec& spec() const { return spec_; }

  // x: batch x input_size (CHW rows). Returns batch x 2 pre-squash means.
  const Mat<T>& Forward(const Mat<T>& x) {
    if (x.cols() != spec_.input_size()) {
      throw ShapeMismatch("policy input has " + std::to_string(x.cols()) + " columns");
    }
    const Mat<T>& f = encoder_.Forward(x);
    const Mat<T>& h1 = relu1_.Forward(fc1_.Forward(f));
    const Mat<T>& h2 = relu2_.Forward(fc2_.Forward(h1));
    const Mat<T>& z = head_.Forward(h2);
    CheckFinite(z, "policy output");
    return z;
  }

  // Accumulates gradients of the loss given dloss/dz (batch x 2).
  void Backward(const Mat<T>& dz) {
    if (!dz.allFinite()) throw NonFiniteGradient("policy output gradient");
    Mat<T> d = head_.Backward(dz, true);
    d = fc2_.Backward(relu2_.Backward(d), true);
    d = fc1_.Backward(relu1_.Backward(d), true);
    encoder_.Backward(d);
  }

  ParamList<T> Parameters() {
    ParamList<T> out;
    encoder_.AppendParameters(out);
    fc1_.AppendParameters(out);
    fc2_.AppendParameters(out);
    head_.AppendParameters(out);
    out.push_back(&log_std_);
    return out;
  }
  void ZeroGrad() {
    for (Param<T>* p : Parameters()) p->grad.Fill(T(0));
  }
  Param<T>& log_std() { return log_std_; }
  const Param<T>& log_std() const { return log_std_; }

  std::vector<bool> ActivationPattern() const {
    std::vector<bool> out;
    encoder_.AppendPattern(out);
    relu1_.AppendPattern(out);
    relu2_.AppendPattern(out);
    return out;
  }

 private:
  NetSpec spec_;
  Encoder<T> encoder_;
  Dense<T> fc1_;
  Relu<T> relu1_;
  Dense<T> fc2_;
  Relu<T> relu2_;
  Dense<T> head_;
  Param<T> log_std_;
};

// (image, action) -> logit that the pair came from the expert.
template <typename T>
class Discriminator {
 public:
  Discriminator() : Discriminator(NetSpec{}, 0) {}
  Discriminator(const NetSpec& spec, uint64_t seed)
      : spec_(spec),
        encoder_("disc.encoder", spec),
        fc1_("disc.fc1", encoder_.feature_size() + 2, spec.hidden1),
        fc2_("disc.fc2", spec.hidden1, spec.hidden2),
        head_("disc.head", spec.hidden2, 1) {
    std::mt19937_64 rng(seed);
    encoder_.Init(rng);
    fc1_.Init(rng);
    fc2_.Init(rng);
    head_.Init(rng);
  }

  const NetSpec& spec() const { return spec_; }

  // x: batch x input_size, actions: batch x 2 (throttle, steering).
  // Returns batch x 1 logits.
  const Mat<T>& Forward(const Mat<T>& x, const Mat<T>& actions) {
    if (x.cols() != spec_.input_size() || actions.cols() != 2 || actions.rows() != x.rows()) {
      throw ShapeMismatch("discriminator input shape");
    }
    const Mat<T>& f = encoder_.Forward(x);
    Mat<T> joint(x.rows(), f.cols() + 2);
    joint << f, actions;
    const Mat<T>& h1 = relu1_.Forward(fc1_.Forward(joint));
    const Mat<T>& h2 = relu2_.Forward(fc2_.Forward(h1));
    const Mat<T>& z = head_.Forward(h2);
    CheckFinite(z, "discriminator output");
    return z;
  }

  void Backward(const Mat<T>& dlogit) {
    if (!dlogit.allFinite()) throw NonFiniteGradient("discriminator output gradient");
    Mat<T> d = head_.Backward(dlogit, true);
    d = fc2_.Backward(relu2_.Backward(d), true);
    Mat<T> dj = fc1_.Backward(relu1_.Backward(d), true);
    encoder_.Backward(dj.leftCols(dj.cols() - 2));
  }

  ParamList<T> Parameters() {
    ParamList<T> out;
    encoder_.AppendParameters(out);
    fc1_.AppendParameters(out);
    fc2_.AppendParameters(out);
    head_.AppendParameters(out);
    return out;
  }
  void ZeroGrad() {
    for (Param<T>* p : Parameters()) p->grad.Fill(T(0));
  }
  std::vector<bool> ActivationPattern() const {
    std::vector<bool> out;
    encoder_.AppendPattern(out);
    relu1_.AppendPattern(out);
    relu2_.AppendPattern(out);
    return out;
  }

 private:
  NetSpec spec_;
  Encoder<T> encoder_;
  Dense<T> fc1_;
  Relu<T> relu1_;
  Dense<T> fc2_;
  Relu<T> relu2_;
  Dense<T> head_;
};

// Checks every gradient buffer; throws NonFiniteGradient naming the tensor.
template <typename T>
void CheckGradients(const ParamList<T>& params) {
  for (const Param<T>* p : params) {
    if (!p->grad.AllFinite()) throw NonFiniteGradient(p->name);
  }
}

}  // namespace laneforge::nn
