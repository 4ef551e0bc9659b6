#pragma once

// Convolution and dense kernels. The default versions lower convolution to
// im2col + GEMM (Eigen) and parallelize the data-movement loops with OpenMP;
// the `reference` namespace holds direct serial loops used by tests and the
// benchmark.

#include <algorithm>

#include "laneforge/nn/tensor.hpp"

namespace laneforge::nn {

struct ConvShape {
  int in_c = 3;
  int in_h = 60;
  int in_w = 80;
  int out_c = 8;
  int kernel = 5;
  int stride = 2;

  int out_h() const { return (in_h - kernel) / stride + 1; }
  int out_w() const { return (in_w - kernel) / stride + 1; }
  int patch() const { return in_c * kernel * kernel; }
  int positions() const { return out_h() * out_w(); }
  int in_size() const { return in_c * in_h * in_w; }
  int out_size() const { return out_c * positions(); }
};

// Layouts: input batch x (in_c*in_h*in_w), CHW per row; weight out_c x patch;
// output batch x (out_c*positions). `cols` receives the im2col matrix
// (patch x batch*positions) needed by the backward pass.
template <typename T>
void Conv2dForward(const ConvShape& s, int batch, const T* input, const T* weight,
                   const T* bias, T* output, Mat<T>& cols) {
  const int P = s.positions();
  const int OW = s.out_w();
  const int K = s.kernel;
  cols.resize(s.patch(), static_cast<Eigen::Index>(batch) * P);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < batch; ++b) {
    const T* in = input + static_cast<size_t>(b) * s.in_size();
    for (int c = 0; c < s.in_c; ++c) {
      for (int ki = 0; ki < K; ++ki) {
        for (int kj = 0; kj < K; ++kj) {
          T* dst = cols.data() + static_cast<size_t>((c * K + ki) * K + kj) * cols.cols() +
                   static_cast<size_t>(b) * P;
          for (int oy = 0; oy < s.out_h(); ++oy) {
            const T* src = in + (static_cast<size_t>(c) * s.in_h + oy * s.stride + ki) * s.in_w + kj;
            for (int ox = 0; ox < OW; ++ox) dst[oy * OW + ox] = src[ox * s.stride];
          }
        }
      }
    }
  }
  ConstMatMap<T> w(weight, s.out_c, s.patch());
  Mat<T> out = w * cols;
#pragma omp parallel for schedule(static)
  for (int b = 0; b < batch; ++b) {
    T* o = output + static_cast<size_t>(b) * s.out_size();
    for (int oc = 0; oc < s.out_c; ++oc) {
      const T* row = out.data() + static_cast<size_t>(oc) * out.cols() + static_cast<size_t>(b) * P;
      for (int p = 0; p < P; ++p) o[oc * P + p] = row[p] + bias[oc];
    }
  }
}

// Accumulates into d_weight / d_bias; overwrites d_input when non-null.
template <typename T>
void Conv2dBackward(const ConvShape& s, int batch, const Mat<T>& cols,
                    const T* weight, const T* d_output, T* d_weight, T* d_bias,
                    T* d_input) {
  const int P = s.positions();
  const int OW = s.out_w();
  const int K = s.kernel;
  Mat<T> dout(s.out_c, static_cast<Eigen::Index>(batch) * P);
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < s.out_c; ++oc) {
    for (int b = 0; b < batch; ++b) {
      const T* src = d_output + static_cast<size_t>(b) * s.out_size() + static_cast<size_t>(oc) * P;
      std::copy(src, src + P, dout.data() + static_cast<size_t>(oc) * dout.cols() +
                                  static_cast<size_t>(b) * P);
    }
  }
  MatMap<T> dw(d_weight, s.out_c, s.patch());
  dw.noalias() += dout * cols.transpose();
  for (int oc = 0; oc < s.out_c; ++oc) d_bias[oc] += dout.row(oc).sum();
  if (d_input == nullptr) return;

  ConstMatMap<T> w(weight, s.out_c, s.patch());
  Mat<T> dcols = w.transpose() * dout;
#pragma omp parallel for schedule(static)
  for (int b = 0; b < batch; ++b) {
    T* din = d_input + static_cast<size_t>(b) * s.in_size();
    std::fill(din, din + s.in_size(), T(0));
    for (int c = 0; c < s.in_c; ++c) {
      for (int ki = 0; ki < K; ++ki) {
        for (int kj = 0; kj < K; ++kj) {
          const T* src = dcols.data() + static_cast<size_t>((c * K + ki) * K + kj) * dcols.cols() +
                         static_cast<size_t>(b) * P;
          for (int oy = 0; oy < s.out_h(); ++oy) {
            T* dst = din + (static_cast<size_t>(c) * s.in_h + oy * s.stride + ki) * s.in_w + kj;
            for (int ox = 0; ox < OW; ++ox) dst[ox * s.stride] += src[oy * OW + ox];
          }
        }
      }
    }
  }
}

// y = x W^T + b with x batch x in, W out x in.
template <typename T>
void DenseForward(int batch, int in, int out, const T* x, const T* weight,
                  const T* bias, T* y) {
  ConstMatMap<T> X(x, batch, in);
  ConstMatMap<T> W(weight, out, in);
  MatMap<T> Y(y, batch, out);
  Y.noalias() = X * W.transpose();
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> B(bias, out);
  Y.rowwise() += B;
}

template <typename T>
void DenseBackward(int batch, int in, int out, const T* x, const T* weight,
                   const T* dy, T* d_weight, T* d_bias, T* dx) {
  ConstMatMap<T> X(x, batch, in);
  ConstMatMap<T> W(weight, out, in);
  ConstMatMap<T> DY(dy, batch, out);
  MatMap<T> DW(d_weight, out, in);
  DW.noalias() += DY.transpose() * X;
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> DB(d_bias, out);
  DB += DY.colwise().sum();
  if (dx != nullptr) {
    MatMap<T> DX(dx, batch, in);
    DX.noalias() = DY * W;
  }
}

namespace reference {

template <typename T>
void Conv2dForward(const ConvShape& s, int batch, const T* input, const T* weight,
                   const T* bias, T* output) {
  const int K = s.kernel;
  for (int b = 0; b < batch; ++b) {
    for (int oc = 0; oc < s.out_c; ++oc) {
      for (int oy = 0; oy < s.out_h(); ++oy) {
        for (int ox = 0; ox < s.out_w(); ++ox) {
          T acc = bias[oc];
          for (int c = 0; c < s.in_c; ++c) {
            for (int ki = 0; ki < K; ++ki) {
              for (int kj = 0; kj < K; ++kj) {
                acc += weight[oc * s.patch() + (c * K + ki) * K + kj] *
                       input[static_cast<size_t>(b) * s.in_size() +
                             (c * s.in_h + oy * s.stride + ki) * s.in_w + ox * s.stride + kj];
              }
            }
          }
          output[static_cast<size_t>(b) * s.out_size() +
                 (oc * s.out_h() + oy) * s.out_w() + ox] = acc;
        }
      }
    }
  }
}

template <typename T>
void Conv2dBackward(const ConvShape& s, int batch, const T* input, const T* weight,
                    const T* d_output, T* d_weight, T* d_bias, T* d_input) {
  const int K = s.kernel;
  if (d_input != nullptr) {
    std::fill(d_input, d_input + static_cast<size_t>(batch) * s.in_size(), T(0));
  }
  for (int b = 0; b < batch; ++b) {
    for (int oc = 0; oc < s.out_c; ++oc) {
      for (int oy = 0; oy < s.out_h(); ++oy) {
        for (int ox = 0; ox < s.out_w(); ++ox) {
          const T g = d_output[static_cast<size_t>(b) * s.out_size() +
                               (oc * s.out_h() + oy) * s.out_w() + ox];
          d_bias[oc] += g;
          for (int c = 0; c < s.in_c; ++c) {
            for (int ki = 0; ki < K; ++ki) {
              for (int kj = 0; kj < K; ++kj) {
                const size_t in_idx = static_cast<size_t>(b) * s.in_size() +
                                      (c * s.in_h + oy * s.stride + ki) * s.in_w +
                                      ox * s.stride + kj;
                const int w_idx = oc * s.patch() + (c * K + ki) * K + kj;
                d_weight[w_idx] += g * input[in_idx];
                if (d_input != nullptr) d_input[in_idx] += g * weight[w_idx];
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void DenseForward(int batch, int in, int out, const T* x, const T* weight,
                  const T* bias, T* y) {
  for (int b = 0; b < batch; ++b) {
    for (int o = 0; o < out; ++o) {
      T acc = bias[o];
      for (int i = 0; i < in; ++i) acc += x[b * in + i] * weight[o * in + i];
      y[b * out + o] = acc;
    }
  }
}

template <typename T>
void DenseBackward(int batch, int in, int out, const T* x, const T* weight,
                   const T* dy, T* d_weight, T* d_bias, T* dx) {
  if (dx != nullptr) std::fill(dx, dx + static_cast<size_t>(batch) * in, T(0));
  for (int b = 0; b < batch; ++b) {
    for (int o = 0; o < out; ++o) {
      const T g = dy[b * out + o];
      d_bias[o] += g;
      for (int i = 0; i < in; ++i) {
        d_weight[o * in + i] += g * x[b * in + i];
        if (dx != nullptr) dx[b * in + i] += g * weight[o * in + i];
      }
    }
  }
}

}  // namespace reference
}  // namespace laneforge::nn
