// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "mirl/rng.hpp"
#include "mirl/tensor.hpp"

namespace testutil {

template <typename T>
mirl::Tensor<T> rand_tensor(std::vector<int> shape, mirl::rng::Engine& eng, double lo = -1.0, double hi = 1.0) {
  mirl::Tensor<T> t(std::move(shape));
  for (auto& v : t.values) v = static_cast<T>(eng.uniform(lo, hi));
  return t;
}

// Six-nested-loop convolution oracle with double accumulation.
template <typename T>
mirl::Tensor<double> conv2d_naive(const mirl::Tensor<T>& x, const mirl::Tensor<T>& k, const mirl::Tensor<T>& bias,
                                  int stride, int pad) {
  const int H = x.dim(0), W = x.dim(1), Cin = x.dim(2);
  const int ks = k.dim(0), Cout = k.dim(3);
  const int OH = (H + 2 * pad - ks) / stride + 1;
  const int OW = (W + 2 * pad - ks) / stride + 1;
  mirl::Tensor<double> out({OH, OW, Cout});
  for (int ho = 0; ho < OH; ++ho)
    for (int wo = 0; wo < OW; ++wo)
      for (int co = 0; co < Cout; ++co) {
        double acc = bias.values[static_cast<std::size_t>(co)];
        for (int i = 0; i < ks; ++i)
          for (int j = 0; j < ks; ++j)
            for (int ci = 0; ci < Cin; ++ci) {
              const int hi = ho * stride + i - pad;
              const int wi = wo * stride + j - pad;
              if (hi < 0 || hi >= H || wi < 0 || wi >= W) continue;
              acc += static_cast<double>(x.at(hi, wi, ci)) *
                     k.values[((static_cast<std::size_t>(i) * ks + j) * Cin + ci) * Cout + co];
            }
        out.at(ho, wo, co) = acc;
      }
  return out;
}

}  // namespace testutil
