#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "laneforge/nn/adam.hpp"
#include "laneforge/nn/inference.hpp"
#include "laneforge/nn/kernels.hpp"
#include "laneforge/nn/layers.hpp"
#include "laneforge/nn/losses.hpp"
#include "laneforge/nn/networks.hpp"
#include "laneforge/nn/weights_io.hpp"
#include "gradcheck.hpp"

namespace laneforge::nn {
namespace {

using oracle::RandomMat;
using oracle::TinySpec;

Observation RandomObservation(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Observation o;
  for (float& v : o.values) v = u(rng);
  return o;
}

TEST(Kernels, ConvMatchesReference) {
  ConvShape s{3, 13, 17, 4, 5, 2};
  const int batch = 3;
  Mat<double> x = RandomMat<double>(batch, s.in_size(), 1);
  Mat<double> w = RandomMat<double>(s.out_c, s.patch(), 2);
  Mat<double> b = RandomMat<double>(1, s.out_c, 3);
  Mat<double> y(batch, s.out_size()), y_ref(batch, s.out_size()), cols;
  Conv2dForward(s, batch, x.data(), w.data(), b.data(), y.data(), cols);
  reference::Conv2dForward(s, batch, x.data(), w.data(), b.data(), y_ref.data());
  EXPECT_LT((y - y_ref).cwiseAbs().maxCoeff(), 1e-12);

  Mat<double> dy = RandomMat<double>(batch, s.out_size(), 4);
  Mat<double> dw = Mat<double>::Zero(s.out_c, s.patch()), dw_ref = dw;
  Mat<double> db = Mat<double>::Zero(1, s.out_c), db_ref = db;
  Mat<double> dx(batch, s.in_size()), dx_ref(batch, s.in_size());
  Conv2dBackward(s, batch, cols, w.data(), dy.data(), dw.data(), db.data(), dx.data());
  reference::Conv2dBackward(s, batch, x.data(), w.data(), dy.data(), dw_ref.data(),
                            db_ref.data(), dx_ref.data());
  EXPECT_LT((dw - dw_ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((db - db_ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((dx - dx_ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kernels, DenseMatchesReference) {
  const int batch = 4, in = 7, out = 5;
  Mat<double> x = RandomMat<double>(batch, in, 1);
  Mat<double> w = RandomMat<double>(out, in, 2);
  Mat<double> b = RandomMat<double>(1, out, 3);
  Mat<double> y(batch, out), y_ref(batch, out);
  DenseForward(batch, in, out, x.data(), w.data(), b.data(), y.data());
  reference::DenseForward(batch, in, out, x.data(), w.data(), b.data(), y_ref.data());
  EXPECT_LT((y - y_ref).cwiseAbs().maxCoeff(), 1e-12);

  Mat<double> dy = RandomMat<double>(batch, out, 4);
  Mat<double> dw = Mat<double>::Zero(out, in), dw_ref = dw;
  Mat<double> db = Mat<double>::Zero(1, out), db_ref = db;
  Mat<double> dx(batch, in), dx_ref(batch, in);
  DenseBackward(batch, in, out, x.data(), w.data(), dy.data(), dw.data(), db.data(), dx.data());
  reference::DenseBackward(batch, in, out, x.data(), w.data(), dy.data(), dw_ref.data(),
                           db_ref.data(), dx_ref.data());
  EXPECT_LT((dw - dw_ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((db - db_ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((dx - dx_ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Policy, ZeroNetworkGivesMidpointAction) {
  PolicyNet<float> net(NetSpec{}, 3);
  for (Param<float>* p : net.Parameters()) p->value.Fill(0.0f);
  Action a = ForwardPolicy(net, RandomObservation(1));
  EXPECT_EQ(a.throttle(), 0.5);
  EXPECT_EQ(a.steering(), 0.0);
}

TEST(Policy, OutputsWithinActionRanges) {
  PolicyNet<float> net(NetSpec{}, 5);
  for (Param<float>* p : net.Parameters()) {
    for (float& v : p->value.values()) v *= 50.0f;
  }
  for (int i = 0; i < 5; ++i) {
    Action a = ForwardPolicy(net, RandomObservation(i));
    EXPECT_GE(a.throttle(), 0.0);
    EXPECT_LE(a.throttle(), 1.0);
    EXPECT_GE(a.steering(), -1.0);
    EXPECT_LE(a.steering(), 1.0);
  }
}

// Straight-line forward pass written from the parameter tensors alone.
std::array<double, 2> HandForward(PolicyNet<double>& net, const Observation& obs) {
  const NetSpec& s = net.spec();
  std::map<std::string, const Tensor<double>*> p;
  for (Param<double>* q : net.Parameters()) p[q->name] = &q->value;
  auto conv = [&](const std::vector<double>& in, int c, int h, int w, const std::string& name,
                  int oc, int& oh, int& ow) {
    oh = (h - s.kernel) / s.stride + 1;
    ow = (w - s.kernel) / s.stride + 1;
    const Tensor<double>& W = *p[name + ".weight"];
    const Tensor<double>& B = *p[name + ".bias"];
    std::vector<double> out(static_cast<size_t>(oc) * oh * ow);
    for (int o = 0; o < oc; ++o)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
          double acc = B[o];
          for (int ci = 0; ci < c; ++ci)
            for (int ky = 0; ky < s.kernel; ++ky)
              for (int kx = 0; kx < s.kernel; ++kx)
                acc += W[((o * c + ci) * s.kernel + ky) * s.kernel + kx] *
                       in[(ci * h + y * s.stride + ky) * w + x * s.stride + kx];
          out[(o * oh + y) * ow + x] = std::max(acc, 0.0);
        }
    return out;
  };
  auto dense = [&](const std::vector<double>& in, const std::string& name, bool relu) {
    const Tensor<double>& W = *p[name + ".weight"];
    const Tensor<double>& B = *p[name + ".bias"];
    const int out_n = W.shape()[0];
    std::vector<double> out(out_n);
    for (int o = 0; o < out_n; ++o) {
      double acc = B[o];
      for (size_t i = 0; i < in.size(); ++i) acc += W[o * in.size() + i] * in[i];
      out[o] = relu ? std::max(acc, 0.0) : acc;
    }
    return out;
  };
  std::vector<double> x(kObsSize);
  for (int r = 0; r < kObsHeight; ++r)
    for (int c = 0; c < kObsWidth; ++c)
      for (int ch = 0; ch < kChannels; ++ch)
        x[(ch * kObsHeight + r) * kObsWidth + c] = obs.at(r, c, ch);
  int h1, w1, h2, w2;
  auto a1 = conv(x, s.channels, s.height, s.width, "policy.encoder.conv1", s.conv1, h1, w1);
  auto a2 = conv(a1, s.conv1, h1, w1, "policy.encoder.conv2", s.conv2, h2, w2);
  auto z = dense(dense(dense(a2, "policy.fc1", true), "policy.fc2", true), "policy.head", false);
  return {z[0], z[1]};
}

TEST(Policy, MatchesHandSteppedForward) {
  PolicyNet<double> net(NetSpec{}, 11);
  Observation obs = RandomObservation(4);
  const Mat<double>& z = net.Forward(PackBatch<double>(obs));
  auto ref = HandForward(net, obs);
  EXPECT_NEAR(z(0, 0), ref[0], 1e-10);
  EXPECT_NEAR(z(0, 1), ref[1], 1e-10);
}

TEST(Policy, FloatAndDoubleNetsShareInitialization) {
  PolicyNet<float> f(NetSpec{}, 9);
  PolicyNet<double> d(NetSpec{}, 9);
  auto pf = f.Parameters();
  auto pd = d.Parameters();
  ASSERT_EQ(pf.size(), pd.size());
  for (size_t i = 0; i < pf.size(); ++i) {
    for (size_t k = 0; k < pf[i]->value.size(); ++k) {
      ASSERT_EQ(pf[i]->value[k], static_cast<float>(pd[i]->value[k]));
    }
  }
}

TEST(Backward, IdentityChain) {
  Dense<double> layer("lin", 1, 1);
  layer.weight().value[0] = 0.7;
  layer.bias().value[0] = 0.0;
  Mat<double> x(1, 1);
  x(0, 0) = 1.0;
  layer.Forward(x);
  Mat<double> dy = Mat<double>::Ones(1, 1);
  layer.Backward(dy, false);
  EXPECT_EQ(layer.weight().grad[0], 1.0);
}

TEST(Backward, DetachedLossGivesZeroGradients) {
  PolicyNet<float> net(NetSpec{}, 2);
  net.ZeroGrad();
  net.Forward(PackBatch<float>(RandomObservation(1)));
  net.Backward(Mat<float>::Zero(1, 2));
  for (Param<float>* p : net.Parameters()) {
    for (float g : p->grad.values()) ASSERT_EQ(g, 0.0f);
  }
}

double MaxRelativeError(auto& net, auto loss) {
  const oracle::GradCheck r = oracle::CheckGradients(net, loss);
  EXPECT_GT(r.checked, 0);
  return r.worst;
}

TEST(GradientCheck, PolicyNet) {
  for (uint64_t seed = 0; seed < 3; ++seed) {
    PolicyNet<double> net(TinySpec(), seed);
    Mat<double> x = RandomMat<double>(3, TinySpec().input_size(), 100 + seed, 0.0, 1.0);
    Mat<double> t = RandomMat<double>(3, 2, 200 + seed, 0.0, 1.0);
    auto loss = [&](bool backward) {
      LossGrad<double> lg = SquashedMse(net.Forward(x), t);
      if (backward) net.Backward(lg.dz);
      return lg.loss;
    };
    EXPECT_LT(MaxRelativeError(net, loss), 1e-4) << "seed " << seed;
  }
}

TEST(GradientCheck, Discriminator) {
  for (uint64_t seed = 0; seed < 3; ++seed) {
    Discriminator<double> net(TinySpec(), seed);
    Mat<double> x = RandomMat<double>(4, TinySpec().input_size(), 300 + seed, 0.0, 1.0);
    Mat<double> a = RandomMat<double>(4, 2, 400 + seed);
    Mat<double> y(4, 1);
    y << 1, 0, 1, 0;
    auto loss = [&](bool backward) {
      LossGrad<double> lg = BceWithLogits(net.Forward(x, a), y);
      if (backward) net.Backward(lg.dz);
      return lg.loss;
    };
    EXPECT_LT(MaxRelativeError(net, loss), 1e-4) << "seed " << seed;
  }
}

TEST(GradientCheck, GaussianLogProb) {
  const double u = 0.3, mean = -0.1, log_std = -0.7, h = 1e-6;
  double dm, dl;
  GaussianLogProbGrad(u, mean, log_std, &dm, &dl);
  auto lp = [&](double m, double l) { return GaussianLogProb(&u, &m, &l, 1); };
  EXPECT_NEAR(dm, (lp(mean + h, log_std) - lp(mean - h, log_std)) / (2 * h), 1e-6);
  EXPECT_NEAR(dl, (lp(mean, log_std + h) - lp(mean, log_std - h)) / (2 * h), 1e-6);
}

TEST(Adam, ZeroGradientLeavesParametersAndCountsStep) {
  Param<float> p("p", {3});
  p.value[0] = 1.0f;
  p.value[1] = -2.0f;
  Adam<float> opt;
  opt.Step({&p});
  EXPECT_EQ(p.value[0], 1.0f);
  EXPECT_EQ(p.value[1], -2.0f);
  EXPECT_EQ(opt.step(), 1);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Param<double> p("p", {1});
  p.grad[0] = 1.0;
  Adam<double> opt;
  opt.Step({&p});
  // m_hat = 1, v_hat = 1 -> -lr / (1 + eps)
  EXPECT_NEAR(p.value[0], -1e-4 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, ShapeChangeIsRejected) {
  Param<float> a("a", {2}), b("b", {3});
  Adam<float> opt;
  opt.Step({&a});
  EXPECT_THROW(opt.Step({&a, &b}), ShapeMismatch);
  EXPECT_THROW(opt.Step({&b}), ShapeMismatch);
}

TEST(Adam, DeterministicRuns) {
  auto run = [] {
    PolicyNet<float> net(TinySpec(), 7);
    Adam<float> opt;
    Mat<float> x = RandomMat<float>(2, TinySpec().input_size(), 1, 0.0, 1.0);
    Mat<float> t = RandomMat<float>(2, 2, 2, 0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      net.ZeroGrad();
      net.Backward(SquashedMse(net.Forward(x), t).dz);
      opt.Step(net.Parameters());
    }
    std::vector<float> flat;
    for (Param<float>* p : net.Parameters()) flat.insert(flat.end(), p->value.values().begin(), p->value.values().end());
    return flat;
  };
  EXPECT_EQ(run(), run());
}

class WeightsIo : public ::testing::Test {
 protected:
  std::string path_ = (std::filesystem::temp_directory_path() / "nn_test_weights.lfw").string();
  void TearDown() override { std::filesystem::remove(path_); }
};

TEST_F(WeightsIo, RoundTripIsBitExact) {
  PolicyNet<float> net(NetSpec{}, 21);
  net.log_std().value[0] = -0.3f;
  SaveWeights(net, path_);
  PolicyNet<float> loaded = LoadPolicy(path_);
  for (int i = 0; i < 10; ++i) {
    Observation o = RandomObservation(50 + i);
    Mat<float> a = net.Forward(PackBatch<float>(o));
    Mat<float> b = loaded.Forward(PackBatch<float>(o));
    EXPECT_EQ(a, b);
  }
  EXPECT_EQ(loaded.log_std().value[0], -0.3f);
}

TEST_F(WeightsIo, DiscriminatorRoundTrip) {
  Discriminator<float> net(TinySpec(), 4), other(TinySpec(), 5);
  SaveWeights(net, path_);
  LoadWeights(other, path_);
  auto pa = net.Parameters(), pb = other.Parameters();
  for (size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
}

TEST_F(WeightsIo, TruncatedFileFailsChecksum) {
  PolicyNet<float> net(TinySpec(), 1);
  SaveWeights(net, path_);
  std::filesystem::resize_file(path_, std::filesystem::file_size(path_) - 9);
  EXPECT_THROW(LoadWeights(net, path_), ChecksumMismatch);
}

TEST_F(WeightsIo, BumpedVersionIsRejected) {
  PolicyNet<float> net(TinySpec(), 1);
  SaveWeights(net, path_);
  std::fstream f(path_, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(4);
  f.put(static_cast<char>(kWeightFormatVersion + 1));
  f.close();
  EXPECT_THROW(LoadWeights(net, path_), VersionMismatch);
}

TEST_F(WeightsIo, FlippedPayloadByteFailsChecksum) {
  PolicyNet<float> net(TinySpec(), 1);
  SaveWeights(net, path_);
  std::fstream f(path_, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(40);
  char c;
  f.get(c);
  f.seekp(40);
  f.put(static_cast<char>(c ^ 0x5a));
  f.close();
  EXPECT_THROW(LoadWeights(net, path_), ChecksumMismatch);
}

TEST_F(WeightsIo, MissingFileIsIoError) {
  PolicyNet<float> net(TinySpec(), 1);
  EXPECT_THROW(LoadWeights(net, path_ + ".missing"), IoError);
}

TEST_F(WeightsIo, WrongTopologyIsShapeMismatch) {
  PolicyNet<float> net(TinySpec(), 1);
  SaveWeights(net, path_);
  EXPECT_THROW(LoadPolicy(path_), ShapeMismatch);
}

TEST(Losses, BceAtZeroLogitIsLogTwo) {
  Mat<float> z = Mat<float>::Zero(2, 1);
  Mat<float> y(2, 1);
  y << 1, 0;
  EXPECT_NEAR(BceWithLogits(z, y).loss, std::log(2.0), 1e-12);
}

TEST(Losses, NonFiniteOutputGradientIsRejected) {
  PolicyNet<float> net(TinySpec(), 1);
  net.Forward(RandomMat<float>(1, TinySpec().input_size(), 3, 0.0, 1.0));
  Mat<float> dz(1, 2);
  dz << std::nanf(""), 0.0f;
  EXPECT_THROW(net.Backward(dz), NonFiniteGradient);
}

TEST(Losses, NonFiniteInputIsRejected) {
  PolicyNet<float> net(TinySpec(), 1);
  Mat<float> x = RandomMat<float>(1, TinySpec().input_size(), 3, 0.0, 1.0);
  x(0, 0) = std::numeric_limits<float>::infinity();
  EXPECT_THROW(net.Forward(x), NonFiniteActivation);
}

}  // namespace
}  // namespace laneforge::nn
