// SPDX-License-Identifier: Apache-2.0
//
// Differentiable operations. Convolution uses the cross-correlation
// convention (no kernel flip). Reductions that feed metrics or small
// vectors accumulate in double; the convolution hot path accumulates in
// the tensor's own precision.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mirl/graph.hpp"
#include "mirl/tensor.hpp"

namespace mirl {

enum class Act { Relu, Gelu, Sigmoid };

namespace detail {

template <typename T>
void conv2d_forward(const T* x, int H, int W, int Cin, const T* K, int k, int Cout,
                    const T* bias, int stride, int pad, T* out, int OH, int OW) {
  for (int ho = 0; ho < OH; ++ho) {
    for (int wo = 0; wo < OW; ++wo) {
      T* orow = out + (static_cast<std::size_t>(ho) * OW + wo) * Cout;
      for (int co = 0; co < Cout; ++co) orow[co] = bias[co];
      for (int i = 0; i < k; ++i) {
        const int hi = ho * stride + i - pad;
        if (hi < 0 || hi >= H) continue;
        for (int j = 0; j < k; ++j) {
          const int wi = wo * stride + j - pad;
          if (wi < 0 || wi >= W) continue;
          const T* xrow = x + (static_cast<std::size_t>(hi) * W + wi) * Cin;
          const T* kpos = K + (static_cast<std::size_t>(i) * k + j) * Cin * Cout;
          for (int ci = 0; ci < Cin; ++ci) {
            const T a = xrow[ci];
            const T* krow = kpos + static_cast<std::size_t>(ci) * Cout;
            for (int co = 0; co < Cout; ++co) orow[co] += a * krow[co];
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward(const T* x, int H, int W, int Cin, const T* K, int k, int Cout,
                     int stride, int pad, const T* go, int OH, int OW,
                     T* gx, T* gK, T* gb) {
  for (int ho = 0; ho < OH; ++ho) {
    for (int wo = 0; wo < OW; ++wo) {
      const T* gorow = go + (static_cast<std::size_t>(ho) * OW + wo) * Cout;
      if (gb) {
        for (int co = 0; co < Cout; ++co) gb[co] += gorow[co];
      }
      for (int i = 0; i < k; ++i) {
        const int hi = ho * stride + i - pad;
        if (hi < 0 || hi >= H) continue;
        for (int j = 0; j < k; ++j) {
          const int wi = wo * stride + j - pad;
          if (wi < 0 || wi >= W) continue;
          const std::size_t xoff = (static_cast<std::size_t>(hi) * W + wi) * Cin;
          const std::size_t koff = (static_cast<std::size_t>(i) * k + j) * Cin * Cout;
          if (gK) {
            const T* xrow = x + xoff;
            for (int ci = 0; ci < Cin; ++ci) {
              const T a = xrow[ci];
              T* gkrow = gK + koff + static_cast<std::size_t>(ci) * Cout;
              for (int co = 0; co < Cout; ++co) gkrow[co] += a * gorow[co];
            }
          }
          if (gx) {
            T* gxrow = gx + xoff;
            for (int ci = 0; ci < Cin; ++ci) {
              const T* krow = K + koff + static_cast<std::size_t>(ci) * Cout;
              T acc = T(0);
              for (int co = 0; co < Cout; ++co) acc += krow[co] * gorow[co];
              gxrow[ci] += acc;
            }
          }
        }
      }
    }
  }
}

template <typename T>
T gelu_tanh(T v) {
  const T c = T(0.7978845608028654);  // sqrt(2/pi)
  const T u = c * (v + T(0.044715) * v * v * v);
  return T(0.5) * v * (T(1) + std::tanh(u));
}

template <typename T>
T gelu_tanh_grad(T v) {
  const T c = T(0.7978845608028654);
  const T u = c * (v + T(0.044715) * v * v * v);
  const T t = std::tanh(u);
  const T du = c * (T(1) + T(3) * T(0.044715) * v * v);
  return T(0.5) * (T(1) + t) + T(0.5) * v * (T(1) - t * t) * du;
}

}  // namespace detail

template <typename T>
Var conv2d(Graph<T>& g, Var input, Var kernel, Var bias, int stride = 1, int padding = 0) {
  const Tensor<T>& x = g.value(input);
  const Tensor<T>& K = g.value(kernel);
  const Tensor<T>& b = g.value(bias);
  require(x.rank() == 3, "conv2d: input must be [H,W,Cin], got " + shape_str(x.shape));
  require(K.rank() == 4 && K.dim(0) == K.dim(1), "conv2d: kernel must be [k,k,Cin,Cout], got " + shape_str(K.shape));
  const int k = K.dim(0);
  require(k == 1 || k == 3, "conv2d: kernel size must be 1 or 3");
  require(stride == 1 || stride == 2, "conv2d: stride must be 1 or 2");
  require(padding >= 0, "conv2d: padding must be non-negative");
  require(K.dim(2) == x.dim(2), "conv2d: input has " + std::to_string(x.dim(2)) + " channels but kernel expects " + std::to_string(K.dim(2)));
  require(b.rank() == 1 && b.dim(0) == K.dim(3), "conv2d: bias must be [Cout], got " + shape_str(b.shape));

  const int H = x.dim(0), W = x.dim(1), Cin = x.dim(2), Cout = K.dim(3);
  const int OH = (H + 2 * padding - k) / stride + 1;
  const int OW = (W + 2 * padding - k) / stride + 1;
  require(OH >= 1 && OW >= 1, "conv2d: output would be empty for input " + shape_str(x.shape));

  Tensor<T> out({OH, OW, Cout});
  detail::conv2d_forward(x.values.data(), H, W, Cin, K.values.data(), k, Cout,
                         b.values.data(), stride, padding, out.values.data(), OH, OW);

  const bool rg = g.requires_grad(input) || g.requires_grad(kernel) || g.requires_grad(bias);
  typename Graph<T>::BackwardFn bw;
  if (rg) {
    bw = [input, kernel, bias, stride, padding, H, W, Cin, k, Cout, OH, OW](Graph<T>& gg, Var self) {
      const Tensor<T>& go = gg.grad_accum(self);
      T* gx = gg.requires_grad(input) ? gg.grad_accum(input).values.data() : nullptr;
      T* gK = gg.requires_grad(kernel) ? gg.grad_accum(kernel).values.data() : nullptr;
      T* gb = gg.requires_grad(bias) ? gg.grad_accum(bias).values.data() : nullptr;
      detail::conv2d_backward(gg.value(input).values.data(), H, W, Cin,
                              gg.value(kernel).values.data(), k, Cout, stride, padding,
                              go.values.data(), OH, OW, gx, gK, gb);
    };
  }
  return g.emplace(std::move(out), rg, std::move(bw));
}

template <typename T>
Var global_avg_pool(Graph<T>& g, Var input) {
  const Tensor<T>& x = g.value(input);
  require(x.rank() == 3, "global_avg_pool: input must be [H,W,C], got " + shape_str(x.shape));
  const int H = x.dim(0), W = x.dim(1), C = x.dim(2);
  require(H >= 1 && W >= 1, "global_avg_pool: empty spatial extent");
  Tensor<T> out({1, 1, C});
  std::vector<double> acc(static_cast<std::size_t>(C), 0.0);
  const T* p = x.values.data();
  for (std::size_t i = 0; i < x.size(); ++i) acc[i % C] += static_cast<double>(p[i]);
  for (int c = 0; c < C; ++c) out.values[static_cast<std::size_t>(c)] = static_cast<T>(acc[static_cast<std::size_t>(c)] / (static_cast<double>(H) * W));

  const bool rg = g.requires_grad(input);
  typename Graph<T>::BackwardFn bw;
  if (rg) {
    bw = [input, H, W, C](Graph<T>& gg, Var self) {
      const Tensor<T>& go = gg.grad_accum(self);
      Tensor<T>& gx = gg.grad_accum(input);
      const T inv = T(1) / static_cast<T>(H * W);
      for (std::size_t i = 0; i < gx.size(); ++i) gx.values[i] += go.values[i % C] * inv;
    };
  }
  return g.emplace(std::move(out), rg, std::move(bw));
}

template <typename T>
Var softmax_vec(Graph<T>& g, Var logits) {
  const Tensor<T>& x = g.value(logits);
  require(x.rank() == 1 && x.dim(0) >= 1, "softmax_vec: input must be a non-empty vector, got " + shape_str(x.shape));
  const std::size_t n = x.size();
  T mx = x.values[0];
  for (T v : x.values) mx = std::max(mx, v);
  Tensor<T> out(x.shape);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = std::exp(x.values[i] - mx);
    sum += static_cast<double>(out.values[i]);
  }
  const T inv = static_cast<T>(1.0 / sum);
  for (auto& v : out.values) v *= inv;

  const bool rg = g.requires_grad(logits);
  typename Graph<T>::BackwardFn bw;
  if (rg) {
    bw = [logits](Graph<T>& gg, Var self) {
      const Tensor<T>& y = gg.value(self);
      const Tensor<T>& go = gg.grad_accum(self);
      Tensor<T>& gx = gg.grad_accum(logits);
      double dot = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) dot += static_cast<double>(go.values[i]) * y.values[i];
      for (std::size_t i = 0; i < y.size(); ++i) gx.values[i] += y.values[i] * (go.values[i] - static_cast<T>(dot));
    };
  }
  return g.emplace(std::move(out), rg, std::move(bw));
}

template <typename T>
Var concat_channels(Graph<T>& g, Var a, Var b) {
  const Tensor<T>& ta = g.value(a);
  const Tensor<T>& tb = g.value(b);
  require(ta.rank() == 3 && tb.rank() == 3, "concat_channels: inputs must be [H,W,C]");
  require(ta.dim(0) == tb.dim(0) && ta.dim(1) == tb.dim(1),
          "concat_channels: spatial mismatch " + shape_str(ta.shape) + " vs " + shape_str(tb.shape));
  const int H = ta.dim(0), W = ta.dim(1), Ca = ta.dim(2), Cb = tb.dim(2);
  Tensor<T> out({H, W, Ca + Cb});
  for (int hw = 0; hw < H * W; ++hw) {
    const std::size_t o = static_cast<std::size_t>(hw) * (Ca + Cb);
    for (int c = 0; c < Ca; ++c) out.values[o + c] = ta.values[static_cast<std::size_t>(hw) * Ca + c];
    for (int c = 0; c < Cb; ++c) out.values[o + Ca + c] = tb.values[static_cast<std::size_t>(hw) * Cb + c];
  }
  const bool rg = g.requires_grad(a) || g.requires_grad(b);
  typename Graph<T>::BackwardFn bw;
  if (rg) {
    bw = [a, b, H, W, Ca, Cb](Graph<T>& gg, Var self) {
      const Tensor<T>& go = gg.grad_accum(self);
      T* ga = gg.requires_grad(a) ? gg.grad_accum(a).values.data() : nullptr;
      T* gb = gg.requires_grad(b) ? gg.grad_accum(b).values.data() : nullptr;
      for (int hw = 0; hw < H * W; ++hw) {
        const std::size_t o = static_cast<std::size_t>(hw) * (Ca + Cb);
        if (ga)
          for (int c = 0; c < Ca; ++c) ga[static_cast<std::size_t>(hw) * Ca + c] += go.values[o + c];
        if (gb)
          for (int c = 0; c < Cb; ++c) gb[static_cast<std::size_t>(hw) * Cb + c] += go.values[o + Ca + c];
      }
    };
  }
  return g.emplace(std::move(out), rg, std::move(bw));
}

// Test-side inverse of concat_channels; plain tensors, no graph.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& t, int ca) {
  require(t.rank() == 3 && ca >= 0 && ca <= t.dim(2), "split_channels: bad split point");
  const int H = t.dim(0), W = t.dim(1), C = t.dim(2), cb = C - ca;
  Tensor<T> a({H, W, ca}), b({H, W, cb});
  for (int hw = 0; hw < H * W; ++hw) {
    for (int c = 0; c < ca; ++c) a.values[static_cast<std::size_t>(hw) * ca + c] = t.values[static_cast<std::size_t>(hw) * C + c];
    for (int c = 0; c < cb; ++c) b.values[static_cast<std::size_t>(hw) * cb + c] = t.values[static_cast<std::size_t>(hw) * C + ca + c];
  }
  return {std::move(a), std::move(b)};
}

template <typename T>
Var upsample_nearest2x(Graph<T>& g, Var input) {
  const Tensor<T>& x = g.value(input);
  require(x.rank() == 3, "upsample_nearest2x: input must be [H,W,C]");
  const int H = x.dim(0), W = x.dim(1), C = x.dim(2);
  Tensor<T> out({2 * H, 2 * W, C});
  for (int i = 0; i < 2 * H; ++i)
    for (int j = 0; j < 2 * W; ++j)
      for (int c = 0; c < C; ++c) out.at(i, j, c) = x.at(i / 2, j / 2, c);
  const bool rg = g.requires_grad(input);
  typename Graph<T>::BackwardFn bw;
  if (rg) {
    bw = [input, H, W, C](Graph<T>& gg, Var self) {
      const Tensor<T>& go = gg.grad_accum(self);
      Tensor<T>& gx = gg.grad_accum(input);
      for (int i = 0; i < 2 * H; ++i)
        for (int j = 0; j < 2 * W; ++j)
          for (int c = 0; c < C; ++c) gx.at(i / 2, j / 2, c) += go.at(i, j, c);
    };
  }
  return g.emplace(std::move(out), rg, std::move(bw));
}

template <typename T>
Var activation(Graph<T>& g, Var input, Act kind) {
  const Tensor<T>& x = g.value(input);
  Tensor<T> out(x.shape);
  switch (kind) {
    case Act::Relu:
      for (std::size_t i = 0; i < x.size(); ++i) out.values[i] = x.values[i] > T(0) ? x.values[i] : T(0);
      break;
    case Act::Gelu:
      for (std::size_t i = 0; i < x.size(); ++i) out.values[i] = detail::gelu_tanh(x.values[i]);
      break;
    case Act::Sigmoid:
      for (std::size_t i = 0; i < x.size(); ++i) out.values[i] = T(1) / (T(1) + std::exp(-x.values[i]));
      break;
  }
  const bool rg = g.requires_grad(input);
  typename Graph<T>::BackwardFn bw;
  if (rg) {
    bw = [input, kind](Graph<T>& gg, Var self) {
      const Tensor<T>& x2 = gg.value(input);
      const Tensor<T>& y = gg.value(self);
      const Tensor<T>& go = gg.grad_accum(self);
      Tensor<T>& gx = gg.grad_accum(input);
      switch (kind) {
        case Act::Relu:
          for (std::size_t i = 0; i < x2.size(); ++i) gx.values[i] += x2.values[i] > T(0) ? go.values[i] : T(0);
          break;
        case Act::Gelu:
          for (std::size_t i = 0; i < x2.size(); ++i) gx.values[i] += go.values[i] * detail::gelu_tanh_grad(x2.values[i]);
          break;
        case Act::Sigmoid:
          for (std::size_t i = 0; i < x2.size(); ++i) gx.values[i] += go.values[i] * y.values[i] * (T(1) - y.values[i]);
          break;
      }
    };
  }
  return g.emplace(std::move(out), rg, std::move(bw));
}

// Mean absolute error: (1/n) * sum |target_i - restored_i|. The subgradient
// at zero difference is zero.
template <typename T>
Var l1_loss(Graph<T>& g, Var restored, Var target) {
  const Tensor<T>& r = g.value(restored);
  const Tensor<T>& t = g.value(target);
  require(r.same_shape(t), "l1_loss: shape mismatch " + shape_str(r.shape) + " vs " + shape_str(t.shape));
  require(r.size() > 0, "l1_loss: empty tensors");
  double acc = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) acc += std::abs(static_cast<double>(t.values[i]) - static_cast<double>(r.values[i]));
  const double n = static_cast<double>(r.size());
  Tensor<T> out = Tensor<T>::scalar(static_cast<T>(acc / n));

  const bool rg = g.requires_grad(restored) || g.requires_grad(target);
  typename Graph<T>::BackwardFn bw;
  if (rg) {
    bw = [restored, target](Graph<T>& gg, Var self) {
      const Tensor<T>& r2 = gg.value(restored);
      const Tensor<T>& t2 = gg.value(target);
      const T go = gg.grad_accum(self).values[0];
      const T inv = go / static_cast<T>(r2.size());
      T* gr = gg.requires_grad(restored) ? gg.grad_accum(restored).values.data() : nullptr;
      T* gt = gg.requires_grad(target) ? gg.grad_accum(target).values.data() : nullptr;
      for (std::size_t i = 0; i < r2.size(); ++i) {
        const T d = r2.values[i] - t2.values[i];
        const T s = d > T(0) ? T(1) : (d < T(0) ? T(-1) : T(0));
        if (gr) gr[i] += s * inv;
        if (gt) gt[i] -= s * inv;
      }
    };
  }
  return g.emplace(std::move(out), rg, std::move(bw));
}

template <typename T>
Var add(Graph<T>& g, Var a, Var b) {
  const Tensor<T>& ta = g.value(a);
  const Tensor<T>& tb = g.value(b);
  require(ta.same_shape(tb), "add: shape mismatch " + shape_str(ta.shape) + " vs " + shape_str(tb.shape));
  Tensor<T> out(ta.shape);
  for (std::size_t i = 0; i < ta.size(); ++i) out.values[i] = ta.values[i] + tb.values[i];
  const bool rg = g.requires_grad(a) || g.requires_grad(b);
  typename Graph<T>::BackwardFn bw;
  if (rg) {
    bw = [a, b](Graph<T>& gg, Var self) {
      const Tensor<T>& go = gg.grad_accum(self);
      if (gg.requires_grad(a)) {
        Tensor<T>& ga = gg.grad_accum(a);
        for (std::size_t i = 0; i < go.size(); ++i) ga.values[i] += go.values[i];
      }
      if (gg.requires_grad(b)) {
        Tensor<T>& gb = gg.grad_accum(b);
        for (std::size_t i = 0; i < go.size(); ++i) gb.values[i] += go.values[i];
      }
    };
  }
  return g.emplace(std::move(out), rg, std::move(bw));
}

template <typename T>
Var scale(Graph<T>& g, Var a, double c) {
  const Tensor<T>& ta = g.value(a);
  Tensor<T> out(ta.shape);
  const T cc = static_cast<T>(c);
  for (std::size_t i = 0; i < ta.size(); ++i) out.values[i] = cc * ta.values[i];
  const bool rg = g.requires_grad(a);
  typename Graph<T>::BackwardFn bw;
  if (rg) {
    bw = [a, cc](Graph<T>& gg, Var self) {
      const Tensor<T>& go = gg.grad_accum(self);
      Tensor<T>& ga = gg.grad_accum(a);
      for (std::size_t i = 0; i < go.size(); ++i) ga.values[i] += cc * go.values[i];
    };
  }
  return g.emplace(std::move(out), rg, std::move(bw));
}

template <typename T>
Var sum_all(Graph<T>& g, Var a) {
  const Tensor<T>& ta = g.value(a);
  double acc = 0.0;
  for (T v : ta.values) acc += static_cast<double>(v);
  Tensor<T> out = Tensor<T>::scalar(static_cast<T>(acc));
  const bool rg = g.requires_grad(a);
  typename Graph<T>::BackwardFn bw;
  if (rg) {
    bw = [a](Graph<T>& gg, Var self) {
      const T go = gg.grad_accum(self).values[0];
      Tensor<T>& ga = gg.grad_accum(a);
      for (auto& v : ga.values) v += go;
    };
  }
  return g.emplace(std::move(out), rg, std::move(bw));
}

// Per-channel gate: out[h,w,c] = features[h,w,c] * gate[c]. The gate is a
// [1,1,C] (or flat [C]) tensor.
template <typename T>
Var channel_gate(Graph<T>& g, Var features, Var gate) {
  const Tensor<T>& f = g.value(features);
  const Tensor<T>& gt = g.value(gate);
  require(f.rank() == 3, "channel_gate: features must be [H,W,C]");
  const int C = f.dim(2);
  require(static_cast<int>(gt.size()) == C, "channel_gate: gate size " + std::to_string(gt.size()) + " != channels " + std::to_string(C));
  Tensor<T> out(f.shape);
  for (std::size_t i = 0; i < f.size(); ++i) out.values[i] = f.values[i] * gt.values[i % C];
  const bool rg = g.requires_grad(features) || g.requires_grad(gate);
  typename Graph<T>::BackwardFn bw;
  if (rg) {
    bw = [features, gate, C](Graph<T>& gg, Var self) {
      const Tensor<T>& f2 = gg.value(features);
      const Tensor<T>& gt2 = gg.value(gate);
      const Tensor<T>& go = gg.grad_accum(self);
      if (gg.requires_grad(features)) {
        Tensor<T>& gf = gg.grad_accum(features);
        for (std::size_t i = 0; i < f2.size(); ++i) gf.values[i] += go.values[i] * gt2.values[i % C];
      }
      if (gg.requires_grad(gate)) {
        Tensor<T>& gg2 = gg.grad_accum(gate);
        std::vector<double> acc(static_cast<std::size_t>(C), 0.0);
        for (std::size_t i = 0; i < f2.size(); ++i) acc[i % C] += static_cast<double>(go.values[i]) * f2.values[i];
        for (int c = 0; c < C; ++c) gg2.values[static_cast<std::size_t>(c)] += static_cast<T>(acc[static_cast<std::size_t>(c)]);
      }
    };
  }
  return g.emplace(std::move(out), rg, std::move(bw));
}

// out[p] = sum_i weights[i] * components[i, p]; weights is [N],
// components is [N, H, W, C].
template <typename T>
Var weighted_sum(Graph<T>& g, Var weights, Var components) {
  const Tensor<T>& w = g.value(weights);
  const Tensor<T>& pc = g.value(components);
  require(w.rank() == 1, "weighted_sum: weights must be a vector");
  require(pc.rank() == 4, "weighted_sum: components must be [N,H,W,C]");
  const int N = pc.dim(0);
  require(w.dim(0) == N, "weighted_sum: " + std::to_string(w.dim(0)) + " weights for " + std::to_string(N) + " components");
  const std::size_t per = pc.size() / static_cast<std::size_t>(N);
  Tensor<T> out({pc.dim(1), pc.dim(2), pc.dim(3)});
  for (int i = 0; i < N; ++i) {
    const T wi = w.values[static_cast<std::size_t>(i)];
    const T* src = pc.values.data() + static_cast<std::size_t>(i) * per;
    for (std::size_t p = 0; p < per; ++p) out.values[p] += wi * src[p];
  }
  const bool rg = g.requires_grad(weights) || g.requires_grad(components);
  typename Graph<T>::BackwardFn bw;
  if (rg) {
    bw = [weights, components, N, per](Graph<T>& gg, Var self) {
      const Tensor<T>& w2 = gg.value(weights);
      const Tensor<T>& pc2 = gg.value(components);
      const Tensor<T>& go = gg.grad_accum(self);
      if (gg.requires_grad(weights)) {
        Tensor<T>& gw = gg.grad_accum(weights);
        for (int i = 0; i < N; ++i) {
          const T* src = pc2.values.data() + static_cast<std::size_t>(i) * per;
          double acc = 0.0;
          for (std::size_t p = 0; p < per; ++p) acc += static_cast<double>(go.values[p]) * src[p];
          gw.values[static_cast<std::size_t>(i)] += static_cast<T>(acc);
        }
      }
      if (gg.requires_grad(components)) {
        Tensor<T>& gpc = gg.grad_accum(components);
        for (int i = 0; i < N; ++i) {
          const T wi = w2.values[static_cast<std::size_t>(i)];
          T* dst = gpc.values.data() + static_cast<std::size_t>(i) * per;
          for (std::size_t p = 0; p < per; ++p) dst[p] += wi * go.values[p];
        }
      }
    };
  }
  return g.emplace(std::move(out), rg, std::move(bw));
}

// Bilinear resize with half-pixel centers; identity when sizes match.
template <typename T>
Var resize_bilinear(Graph<T>& g, Var input, int out_h, int out_w) {
  const Tensor<T>& x = g.value(input);
  require(x.rank() == 3, "resize_bilinear: input must be [H,W,C]");
  require(out_h >= 1 && out_w >= 1, "resize_bilinear: output size must be positive");
  const int H = x.dim(0), W = x.dim(1), C = x.dim(2);

  struct Tap {
    int y0, y1, x0, x1;
    T fy, fx;
  };
  std::vector<Tap> taps(static_cast<std::size_t>(out_h) * out_w);
  const double sh = static_cast<double>(H) / out_h;
  const double sw = static_cast<double>(W) / out_w;
  for (int oy = 0; oy < out_h; ++oy) {
    double sy = (oy + 0.5) * sh - 0.5;
    if (sy < 0) sy = 0;
    int y0 = static_cast<int>(sy);
    if (y0 > H - 1) y0 = H - 1;
    const int y1 = std::min(y0 + 1, H - 1);
    const T fy = static_cast<T>(sy - y0);
    for (int ox = 0; ox < out_w; ++ox) {
      double sx = (ox + 0.5) * sw - 0.5;
      if (sx < 0) sx = 0;
      int x0 = static_cast<int>(sx);
      if (x0 > W - 1) x0 = W - 1;
      const int x1 = std::min(x0 + 1, W - 1);
      const T fx = static_cast<T>(sx - x0);
      taps[static_cast<std::size_t>(oy) * out_w + ox] = Tap{y0, y1, x0, x1, fy, fx};
    }
  }

  Tensor<T> out({out_h, out_w, C});
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      const Tap& tp = taps[static_cast<std::size_t>(oy) * out_w + ox];
      for (int c = 0; c < C; ++c) {
        const T top = x.at(tp.y0, tp.x0, c) * (T(1) - tp.fx) + x.at(tp.y0, tp.x1, c) * tp.fx;
        const T bot = x.at(tp.y1, tp.x0, c) * (T(1) - tp.fx) + x.at(tp.y1, tp.x1, c) * tp.fx;
        out.at(oy, ox, c) = top * (T(1) - tp.fy) + bot * tp.fy;
      }
    }
  }

  const bool rg = g.requires_grad(input);
  typename Graph<T>::BackwardFn bw;
  if (rg) {
    bw = [input, taps, out_h, out_w, C](Graph<T>& gg, Var self) {
      const Tensor<T>& go = gg.grad_accum(self);
      Tensor<T>& gx = gg.grad_accum(input);
      for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
          const Tap& tp = taps[static_cast<std::size_t>(oy) * out_w + ox];
          for (int c = 0; c < C; ++c) {
            const T go_v = go.at(oy, ox, c);
            gx.at(tp.y0, tp.x0, c) += go_v * (T(1) - tp.fy) * (T(1) - tp.fx);
            gx.at(tp.y0, tp.x1, c) += go_v * (T(1) - tp.fy) * tp.fx;
            gx.at(tp.y1, tp.x0, c) += go_v * tp.fy * (T(1) - tp.fx);
            gx.at(tp.y1, tp.x1, c) += go_v * tp.fy * tp.fx;
          }
        }
      }
    };
  }
  return g.emplace(std::move(out), rg, std::move(bw));
}

template <typename T>
Var reshape(Graph<T>& g, Var input, std::vector<int> new_shape) {
  const Tensor<T>& x = g.value(input);
  require(numel(new_shape) == x.size(), "reshape: cannot view " + shape_str(x.shape) + " as " + shape_str(new_shape));
  Tensor<T> out(std::move(new_shape), x.values);
  const bool rg = g.requires_grad(input);
  typename Graph<T>::BackwardFn bw;
  if (rg) {
    bw = [input](Graph<T>& gg, Var self) {
      const Tensor<T>& go = gg.grad_accum(self);
      Tensor<T>& gx = gg.grad_accum(input);
      for (std::size_t i = 0; i < go.size(); ++i) gx.values[i] += go.values[i];
    };
  }
  return g.emplace(std::move(out), rg, std::move(bw));
}

}  // namespace mirl
