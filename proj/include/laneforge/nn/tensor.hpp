#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace laneforge::nn {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<Mat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const Mat<T>>;

// Dense row-major buffer with an explicit shape.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, T fill = T(0))
      : shape_(std::move(shape)), values_(Count(shape_), fill) {}

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  size_t size() const { return values_.size(); }
  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }
  T& operator[](size_t i) { return values_[i]; }
  const T& operator[](size_t i) const { return values_[i]; }

  void Fill(T v) { std::fill(values_.begin(), values_.end(), v); }
  bool AllFinite() const {
    for (T v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  // View as rows x cols; rows * cols must equal size().
  MatMap<T> AsMatrix(int rows, int cols) { return MatMap<T>(data(), rows, cols); }
  ConstMatMap<T> AsMatrix(int rows, int cols) const {
    return ConstMatMap<T>(data(), rows, cols);
  }

  bool operator==(const Tensor&) const = default;

  static size_t Count(const std::vector<int>& shape) {
    return std::accumulate(shape.begin(), shape.end(), size_t{1},
                           [](size_t a, int d) { return a * static_cast<size_t>(d); });
  }

 private:
  std::vector<int> shape_;
  // Aligned so vectorized Eigen reductions peel identically for every
  // buffer, keeping results independent of where the heap puts it.
  std::vector<T, Eigen::aligned_allocator<T>> values_;
};

// Trainable parameter with its gradient accumulator.
template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Param() = default;
  Param(std::string n, std::vector<int> shape)
      : name(std::move(n)), value(shape), grad(shape) {}
};

template <typename T>
using ParamList = std::vector<Param<T>*>;

}  // namespace laneforge::nn
