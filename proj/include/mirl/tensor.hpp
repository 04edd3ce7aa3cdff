// SPDX-License-Identifier: Apache-2.0
//
// Dense row-major tensor of 32-bit floats (or doubles inside the
// gradient-check harness). Shapes follow the [H, W, C] convention for
// images and [k, k, Cin, Cout] for convolution kernels.
#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mirl {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline std::size_t numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    require(d >= 0, "tensor dimension must be non-negative");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

inline std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> values;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), values(numel(shape), T(0)) {}
  Tensor(std::vector<int> s, std::vector<T> v) : shape(std::move(s)), values(std::move(v)) {
    require(numel(shape) == values.size(), "tensor value count does not match shape " + shape_str(shape));
  }

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int> s, T fill) {
    Tensor t(std::move(s));
    std::fill(t.values.begin(), t.values.end(), fill);
    return t;
  }
  static Tensor scalar(T v) { return Tensor({1}, {v}); }

  std::size_t size() const { return values.size(); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape.at(static_cast<std::size_t>(i)); }
  bool empty() const { return values.empty(); }

  T& operator[](std::size_t i) { return values[i]; }
  const T& operator[](std::size_t i) const { return values[i]; }

  // [H, W, C] addressing
  T& at(int h, int w, int c) {
    return values[(static_cast<std::size_t>(h) * dim(1) + w) * dim(2) + c];
  }
  const T& at(int h, int w, int c) const {
    return values[(static_cast<std::size_t>(h) * dim(1) + w) * dim(2) + c];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.values.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out.values[i] = static_cast<U>(values[i]);
    return out;
  }
};

template <typename T>
inline Tensor<T> clamp01(Tensor<T> t) {
  for (auto& v : t.values) v = v < T(0) ? T(0) : (v > T(1) ? T(1) : v);
  return t;
}

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace mirl
