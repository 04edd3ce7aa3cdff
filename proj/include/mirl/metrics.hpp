// SPDX-License-Identifier: Apache-2.0
//
// PSNR = 10*log10(MAX^2/MSE), infinity for identical images.
// SSIM uses the standard 11x11 Gaussian window (sigma 1.5), constants
// C1=(0.01*MAX)^2 and C2=(0.03*MAX)^2, evaluated per channel over valid
// window positions and averaged over positions and channels.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "mirl/tensor.hpp"

namespace mirl {

struct MetricConfig {
  double max_value = 1.0;
  int ssim_window = 11;
  double ssim_sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;

  double c1() const { return (k1 * max_value) * (k1 * max_value); }
  double c2() const { return (k2 * max_value) * (k2 * max_value); }

  void validate() const {
    require(max_value > 0, "metric dynamic range must be positive");
    require(ssim_window >= 1 && ssim_window % 2 == 1, "ssim window must be odd");
    require(ssim_sigma > 0, "ssim sigma must be positive");
  }
};

template <typename T>
double mse(const Tensor<T>& x, const Tensor<T>& y) {
  require(x.same_shape(y), "mse: shape mismatch " + shape_str(x.shape) + " vs " + shape_str(y.shape));
  require(x.size() > 0, "mse: empty tensors");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x.values[i]) - static_cast<double>(y.values[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

template <typename T>
double psnr(const Tensor<T>& x, const Tensor<T>& y, const MetricConfig& cfg = {}) {
  cfg.validate();
  const double m = mse(x, y);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(cfg.max_value * cfg.max_value / m);
}

namespace detail {

inline std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(size) * size);
  const int r = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      const double dy = i - r, dx = j - r;
      const double v = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
      w[static_cast<std::size_t>(i) * size + j] = v;
      sum += v;
    }
  for (auto& v : w) v /= sum;
  return w;
}

}  // namespace detail

template <typename T>
double ssim(const Tensor<T>& x, const Tensor<T>& y, const MetricConfig& cfg = {}) {
  cfg.validate();
  require(x.same_shape(y), "ssim: shape mismatch " + shape_str(x.shape) + " vs " + shape_str(y.shape));
  require(x.rank() == 3, "ssim: images must be [H,W,C]");
  const int H = x.dim(0), W = x.dim(1), C = x.dim(2);
  const int win = cfg.ssim_window, r = win / 2;
  require(H >= win && W >= win,
          "ssim: image " + shape_str(x.shape) + " smaller than the " + std::to_string(win) + "x" + std::to_string(win) + " window");

  const std::vector<double> w = detail::gaussian_window(win, cfg.ssim_sigma);
  const double c1 = cfg.c1(), c2 = cfg.c2();

  double total = 0.0;
  std::size_t count = 0;
  for (int c = 0; c < C; ++c) {
    for (int cy = r; cy < H - r; ++cy) {
      for (int cx = r; cx < W - r; ++cx) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
        std::size_t wi = 0;
        for (int i = -r; i <= r; ++i) {
          for (int j = -r; j <= r; ++j, ++wi) {
            const double a = x.at(cy + i, cx + j, c);
            const double b = y.at(cy + i, cx + j, c);
            const double ww = w[wi];
            sx += ww * a;
            sy += ww * b;
            sxx += ww * a * a;
            syy += ww * b * b;
            sxy += ww * a * b;
          }
        }
        const double mu_x = sx, mu_y = sy;
        const double var_x = sxx - mu_x * mu_x;
        const double var_y = syy - mu_y * mu_y;
        const double cov = sxy - mu_x * mu_y;
        total += ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) /
                 ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
        ++count;
      }
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace mirl
