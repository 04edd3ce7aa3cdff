// SPDX-License-Identifier: Apache-2.0
//
// Tensor engine tests. Expected values for convolution, pooling, loss and
// activations come from naive loop oracles written here, independent of
// the engine's kernels; gradient correctness is checked against central
// differences in double precision.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mirl/gradcheck.hpp"
#include "mirl/graph.hpp"
#include "mirl/ops.hpp"
#include "mirl/rng.hpp"
#include "mirl/tensor.hpp"

using namespace mirl;
using Catch::Approx;

namespace {

template <typename T>
Tensor<T> rand_tensor(std::vector<int> shape, rng::Engine& eng, double lo = -1.0, double hi = 1.0) {
  Tensor<T> t(std::move(shape));
  for (auto& v : t.values) v = static_cast<T>(eng.uniform(lo, hi));
  return t;
}

// Six-nested-loop convolution oracle, double accumulation.
template <typename T>
Tensor<double> conv2d_naive(const Tensor<T>& x, const Tensor<T>& k, const Tensor<T>& bias, int stride, int pad) {
  const int H = x.dim(0), W = x.dim(1), Cin = x.dim(2);
  const int ks = k.dim(0), Cout = k.dim(3);
  const int OH = (H + 2 * pad - ks) / stride + 1;
  const int OW = (W + 2 * pad - ks) / stride + 1;
  Tensor<double> out({OH, OW, Cout});
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
              const double xv = x.at(hi, wi, ci);
              const double kv = k.values[((static_cast<std::size_t>(i) * ks + j) * Cin + ci) * Cout + co];
              acc += xv * kv;
            }
        out.at(ho, wo, co) = acc;
      }
  return out;
}

}  // namespace

TEST_CASE("conv2d identity 1x1 kernel reproduces the input") {
  rng::Engine eng(1);
  auto x = rand_tensor<float>({4, 5, 3}, eng);
  Tensor<float> k({1, 1, 3, 3});
  for (int c = 0; c < 3; ++c) k.values[static_cast<std::size_t>(c) * 3 + c] = 1.0f;
  Tensor<float> b({3});

  GraphF g;
  Var out = conv2d(g, g.constant(x), g.constant(k), g.constant(b), 1, 0);
  REQUIRE(g.value(out).shape == x.shape);
  REQUIRE(g.value(out).values == x.values);
}

TEST_CASE("conv2d constant field with all-ones 3x3 kernel") {
  const float v = 0.7f;
  Tensor<float> x = Tensor<float>::full({6, 6, 1}, v);
  Tensor<float> k = Tensor<float>::full({3, 3, 1, 1}, 1.0f);
  Tensor<float> b({1});

  GraphF g;
  Var out = conv2d(g, g.constant(x), g.constant(k), g.constant(b), 1, 1);
  const auto& o = g.value(out);
  REQUIRE(o.shape == std::vector<int>{6, 6, 1});
  for (int i = 1; i < 5; ++i)
    for (int j = 1; j < 5; ++j) CHECK(o.at(i, j, 0) == Approx(9.0 * v).epsilon(1e-6));
  CHECK(o.at(0, 0, 0) == Approx(4.0 * v).epsilon(1e-6));  // corner sees a 2x2 window
}

TEST_CASE("conv2d matches the naive loop oracle") {
  rng::Engine eng(7);
  auto x = rand_tensor<float>({5, 5, 2}, eng);
  auto k = rand_tensor<float>({3, 3, 2, 3}, eng);
  auto b = rand_tensor<float>({3}, eng);

  for (auto [stride, pad] : {std::pair{1, 1}, std::pair{1, 0}, std::pair{2, 1}}) {
    GraphF g;
    Var out = conv2d(g, g.constant(x), g.constant(k), g.constant(b), stride, pad);
    Tensor<double> want = conv2d_naive(x, k, b, stride, pad);
    const auto& got = g.value(out);
    REQUIRE(got.shape == want.shape);
    for (std::size_t i = 0; i < got.size(); ++i)
      CHECK(got.values[i] == Approx(want.values[i]).epsilon(1e-5).margin(1e-6));
  }
}

TEST_CASE("conv2d stride 2 halves even spatial dims exactly") {
  rng::Engine eng(3);
  for (int H : {4, 8, 16, 32}) {
    auto x = rand_tensor<float>({H, H + 2 * (H % 4 == 0), 2}, eng);
    auto k = rand_tensor<float>({3, 3, 2, 4}, eng);
    Tensor<float> b({4});
    GraphF g;
    Var out = conv2d(g, g.constant(x), g.constant(k), g.constant(b), 2, 1);
    CHECK(g.value(out).dim(0) == x.dim(0) / 2);
    CHECK(g.value(out).dim(1) == x.dim(1) / 2);
  }
}

TEST_CASE("conv2d rejects channel mismatch with a descriptive error") {
  GraphF g;
  Var x = g.constant(Tensor<float>({4, 4, 2}));
  Var k = g.constant(Tensor<float>({3, 3, 3, 4}));
  Var b = g.constant(Tensor<float>({4}));
  REQUIRE_THROWS_WITH(conv2d(g, x, k, b, 1, 1), Catch::Matchers::ContainsSubstring("channels"));
}

TEST_CASE("global_avg_pool") {
  SECTION("constant image returns the constant per channel") {
    GraphF g;
    Var out = global_avg_pool(g, g.constant(Tensor<float>::full({3, 4, 2}, 0.25f)));
    REQUIRE(g.value(out).shape == std::vector<int>{1, 1, 2});
    CHECK(g.value(out).values[0] == 0.25f);
    CHECK(g.value(out).values[1] == 0.25f);
  }
  SECTION("2x2 single channel {1,2,3,4} -> 2.5") {
    GraphF g;
    Var out = global_avg_pool(g, g.constant(Tensor<float>({2, 2, 1}, {1, 2, 3, 4})));
    CHECK(g.value(out).values[0] == 2.5f);
  }
  SECTION("random input matches the summation oracle exactly") {
    rng::Engine eng(11);
    auto x = rand_tensor<float>({7, 5, 3}, eng);
    GraphF g;
    Var out = global_avg_pool(g, g.constant(x));
    for (int c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (int h = 0; h < 7; ++h)
        for (int w = 0; w < 5; ++w) acc += static_cast<double>(x.at(h, w, c));
      CHECK(g.value(out).values[static_cast<std::size_t>(c)] == static_cast<float>(acc / 35.0));
    }
  }
}

TEST_CASE("softmax_vec") {
  SECTION("equal logits are uniform") {
    GraphF g;
    Var out = softmax_vec(g, g.constant(Tensor<float>::full({4}, 1.3f)));
    for (float v : g.value(out).values) CHECK(v == 0.25f);
  }
  SECTION("singleton") {
    GraphF g;
    Var out = softmax_vec(g, g.constant(Tensor<float>({1}, {42.0f})));
    CHECK(g.value(out).values[0] == 1.0f);
  }
  SECTION("(0, ln 3) -> (0.25, 0.75)") {
    GraphF g;
    Var out = softmax_vec(g, g.constant(Tensor<float>({2}, {0.0f, std::log(3.0f)})));
    CHECK(g.value(out).values[0] == Approx(0.25).epsilon(1e-6));
    CHECK(g.value(out).values[1] == Approx(0.75).epsilon(1e-6));
  }
  SECTION("outputs sum to one and are shift invariant") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      rng::Engine eng(seed);
      auto x = rand_tensor<float>({6}, eng, -4.0, 4.0);
      const float c = static_cast<float>(eng.uniform(-20.0, 20.0));
      Tensor<float> shifted = x;
      for (auto& v : shifted.values) v += c;
      GraphF g;
      const auto& a = g.value(softmax_vec(g, g.constant(x)));
      const auto& b = g.value(softmax_vec(g, g.constant(shifted)));
      double sum = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        sum += a.values[i];
        CHECK(a.values[i] > 0.0f);
        CHECK(a.values[i] == Approx(b.values[i]).margin(1e-6));
      }
      CHECK(sum == Approx(1.0).margin(1e-6));
    }
  }
}

TEST_CASE("concat_channels") {
  rng::Engine eng(5);
  SECTION("concat with an empty tensor is the identity") {
    auto x = rand_tensor<float>({3, 3, 2}, eng);
    GraphF g;
    Var out = concat_channels(g, g.constant(x), g.constant(Tensor<float>({3, 3, 0})));
    CHECK(g.value(out).shape == x.shape);
    CHECK(g.value(out).values == x.values);
  }
  SECTION("1x1 inputs concatenate in order") {
    GraphF g;
    Var out = concat_channels(g, g.constant(Tensor<float>({1, 1, 2}, {1, 2})),
                              g.constant(Tensor<float>({1, 1, 1}, {3})));
    CHECK(g.value(out).values == std::vector<float>{1, 2, 3});
  }
  SECTION("split inverts concat bit-exactly") {
    auto a = rand_tensor<float>({4, 6, 3}, eng);
    auto b = rand_tensor<float>({4, 6, 5}, eng);
    GraphF g;
    Var cat = concat_channels(g, g.constant(a), g.constant(b));
    auto [sa, sb] = split_channels(g.value(cat), 3);
    CHECK(sa.values == a.values);
    CHECK(sb.values == b.values);
  }
  SECTION("spatial mismatch is rejected") {
    GraphF g;
    REQUIRE_THROWS_AS(concat_channels(g, g.constant(Tensor<float>({2, 2, 1})), g.constant(Tensor<float>({3, 2, 1}))),
                      std::invalid_argument);
  }
}

TEST_CASE("upsample_nearest2x") {
  SECTION("single pixel replicates") {
    GraphF g;
    Var out = upsample_nearest2x(g, g.constant(Tensor<float>({1, 1, 1}, {0.6f})));
    REQUIRE(g.value(out).shape == std::vector<int>{2, 2, 1});
    for (float v : g.value(out).values) CHECK(v == 0.6f);
  }
  SECTION("preserves the mean") {
    rng::Engine eng(9);
    auto x = rand_tensor<float>({5, 4, 2}, eng);
    GraphF g;
    Var up = upsample_nearest2x(g, g.constant(x));
    const auto& m1 = g.value(global_avg_pool(g, up));
    const auto& m0 = g.value(global_avg_pool(g, g.constant(x)));
    for (std::size_t i = 0; i < m0.size(); ++i) CHECK(m1.values[i] == Approx(m0.values[i]).margin(1e-6));
  }
  SECTION("matches the index-mapping oracle") {
    rng::Engine eng(13);
    auto x = rand_tensor<float>({3, 3, 2}, eng);
    GraphF g;
    const auto& o = g.value(upsample_nearest2x(g, g.constant(x)));
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        for (int c = 0; c < 2; ++c) CHECK(o.at(i, j, c) == x.at(i / 2, j / 2, c));
  }
}

TEST_CASE("activations") {
  SECTION("relu") {
    GraphF g;
    const auto& o = g.value(activation(g, g.constant(Tensor<float>({3}, {-1, 0, 2})), Act::Relu));
    CHECK(o.values == std::vector<float>{0, 0, 2});
  }
  SECTION("sigmoid at zero") {
    GraphF g;
    const auto& o = g.value(activation(g, g.constant(Tensor<float>({1}, {0.0f})), Act::Sigmoid));
    CHECK(o.values[0] == 0.5f);
  }
  SECTION("gelu matches the tanh formula on a grid") {
    std::vector<float> grid;
    for (double v = -3.0; v <= 3.0; v += 0.125) grid.push_back(static_cast<float>(v));
    GraphF g;
    const auto& o = g.value(activation(g, g.constant(Tensor<float>({static_cast<int>(grid.size())}, grid)), Act::Gelu));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = grid[i];
      const double want = 0.5 * x * (1.0 + std::tanh(std::sqrt(2.0 / 3.14159265358979323846) * (x + 0.044715 * x * x * x)));
      CHECK(o.values[i] == Approx(want).margin(1e-6));
    }
  }
}

TEST_CASE("l1_loss") {
  rng::Engine eng(17);
  SECTION("identical tensors give zero") {
    auto x = rand_tensor<float>({4, 4, 3}, eng);
    GraphF g;
    CHECK(g.value(l1_loss(g, g.constant(x), g.constant(x))).values[0] == 0.0f);
  }
  SECTION("all-zero vs all-one gives one") {
    GraphF g;
    Var loss = l1_loss(g, g.constant(Tensor<float>({2, 2, 3})), g.constant(Tensor<float>::full({2, 2, 3}, 1.0f)));
    CHECK(g.value(loss).values[0] == 1.0f);
  }
  SECTION("random pair matches the loop oracle") {
    auto a = rand_tensor<float>({5, 3, 2}, eng);
    auto b = rand_tensor<float>({5, 3, 2}, eng);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(static_cast<double>(b.values[i]) - a.values[i]);
    GraphF g;
    CHECK(g.value(l1_loss(g, g.constant(a), g.constant(b))).values[0] == Approx(acc / a.size()).margin(1e-7));
  }
  SECTION("shape mismatch is rejected") {
    GraphF g;
    REQUIRE_THROWS_AS(l1_loss(g, g.constant(Tensor<float>({2, 2, 1})), g.constant(Tensor<float>({2, 2, 2}))),
                      std::invalid_argument);
  }
}

TEST_CASE("backward") {
  rng::Engine eng(23);
  SECTION("grad of sum is all ones") {
    auto x = rand_tensor<float>({3, 2, 2}, eng);
    GraphF g;
    Var xv = g.leaf(x, true);
    g.backward(sum_all(g, xv));
    for (float v : g.grad(xv).values) CHECK(v == 1.0f);
  }
  SECTION("chain rule through scale and l1") {
    const float c = 2.5f;
    auto x = rand_tensor<float>({10}, eng, 0.2, 1.0);
    x.values[3] = -x.values[3];  // mixed signs
    GraphF g;
    Var xv = g.leaf(x, true);
    Var loss = l1_loss(g, scale(g, xv, c), g.constant(Tensor<float>({10})));
    g.backward(loss);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const float sign = x.values[i] > 0 ? 1.0f : -1.0f;
      CHECK(g.grad(xv).values[i] == Approx(c * sign / 10.0f).margin(1e-9));
    }
  }
  SECTION("gradients sum over fan-out") {
    auto x = rand_tensor<float>({4}, eng);
    GraphF g;
    Var xv = g.leaf(x, true);
    g.backward(sum_all(g, add(g, xv, xv)));
    for (float v : g.grad(xv).values) CHECK(v == 2.0f);
  }
  SECTION("backward twice without re-forward is rejected") {
    GraphF g;
    Var xv = g.leaf(Tensor<float>({2}, {1, 2}), true);
    Var loss = sum_all(g, xv);
    g.backward(loss);
    REQUIRE_THROWS_AS(g.backward(loss), std::logic_error);
  }
  SECTION("forward is deterministic") {
    auto x = rand_tensor<float>({8, 8, 3}, eng);
    auto k = rand_tensor<float>({3, 3, 3, 4}, eng);
    auto b = rand_tensor<float>({4}, eng);
    GraphF g1, g2;
    const auto& o1 = g1.value(conv2d(g1, g1.constant(x), g1.constant(k), g1.constant(b), 1, 1));
    const auto& o2 = g2.value(conv2d(g2, g2.constant(x), g2.constant(k), g2.constant(b), 1, 1));
    CHECK(o1.values == o2.values);
  }
}

TEST_CASE("finite differences validate every op's gradient") {
  SECTION("linear function is exact") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      rng::Engine eng(seed);
      auto point = rand_tensor<double>({12}, eng);
      auto a = rand_tensor<double>({12}, eng);
      const double err = finite_diff_check(
          [&](Graph<double>& g, Var x) {
            Var prod = channel_gate(g, reshape(g, x, {1, 1, 12}), g.constant(a));
            return sum_all(g, prod);
          },
          point);
      CHECK(err < 1e-9);
    }
  }
  SECTION("conv + gelu + gap composite") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      rng::Engine eng(seed);
      auto point = rand_tensor<double>({5, 5, 2}, eng);
      auto k = rand_tensor<double>({3, 3, 2, 3}, eng);
      auto b = rand_tensor<double>({3}, eng);
      auto gains = rand_tensor<double>({3}, eng);
      const double err = finite_diff_check(
          [&](Graph<double>& g, Var x) {
            Var y = conv2d(g, x, g.constant(k), g.constant(b), 1, 1);
            y = activation(g, y, Act::Gelu);
            return sum_all(g, channel_gate(g, global_avg_pool(g, y), g.constant(gains)));
          },
          point);
      CHECK(err < 1e-5);
    }
  }
  SECTION("relu away from the kink") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      rng::Engine eng(seed);
      Tensor<double> point({16});
      for (auto& v : point.values) {
        v = eng.uniform(0.1, 1.0);
        if (eng.uniform() < 0.5) v = -v;
      }
      auto a = rand_tensor<double>({16}, eng);
      const double err = finite_diff_check(
          [&](Graph<double>& g, Var x) {
            Var y = activation(g, x, Act::Relu);
            return sum_all(g, channel_gate(g, reshape(g, y, {1, 1, 16}), g.constant(a)));
          },
          point);
      CHECK(err < 1e-6);
    }
  }
  SECTION("kernel and bias gradients of conv2d") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      rng::Engine eng(seed);
      auto x = rand_tensor<double>({4, 4, 2}, eng);
      auto k = rand_tensor<double>({3, 3, 2, 2}, eng);
      auto b = rand_tensor<double>({2}, eng);
      const double ek = finite_diff_check(
          [&](Graph<double>& g, Var kv) { return sum_all(g, activation(g, conv2d(g, g.constant(x), kv, g.constant(b), 2, 1), Act::Gelu)); }, k);
      const double eb = finite_diff_check(
          [&](Graph<double>& g, Var bv) { return sum_all(g, activation(g, conv2d(g, g.constant(x), g.constant(k), bv, 1, 0), Act::Sigmoid)); }, b);
      CHECK(ek < 1e-5);
      CHECK(eb < 1e-5);
    }
  }
  SECTION("softmax, concat, upsample, resize, weighted sum, l1") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      rng::Engine eng(seed);
      auto probe = rand_tensor<double>({5}, eng, -2.0, 2.0);
      auto gains = rand_tensor<double>({5}, eng);
      CHECK(finite_diff_check(
                [&](Graph<double>& g, Var x) {
                  return sum_all(g, channel_gate(g, reshape(g, softmax_vec(g, x), {1, 1, 5}), g.constant(gains)));
                },
                probe) < 1e-5);

      auto a = rand_tensor<double>({3, 3, 2}, eng);
      CHECK(finite_diff_check(
                [&](Graph<double>& g, Var x) {
                  Var cat = concat_channels(g, x, g.constant(a));
                  return sum_all(g, activation(g, upsample_nearest2x(g, cat), Act::Gelu));
                },
                rand_tensor<double>({3, 3, 2}, eng)) < 1e-5);

      CHECK(finite_diff_check(
                [&](Graph<double>& g, Var x) { return sum_all(g, activation(g, resize_bilinear(g, x, 7, 5), Act::Gelu)); },
                rand_tensor<double>({3, 4, 2}, eng)) < 1e-5);

      auto comps = rand_tensor<double>({4, 3, 3, 2}, eng);
      auto mix_w = rand_tensor<double>({4}, eng);
      CHECK(finite_diff_check(
                [&](Graph<double>& g, Var w) {
                  return sum_all(g, activation(g, weighted_sum(g, softmax_vec(g, w), g.constant(comps)), Act::Gelu));
                },
                mix_w) < 1e-5);
      CHECK(finite_diff_check(
                [&](Graph<double>& g, Var pc) {
                  return sum_all(g, activation(g, weighted_sum(g, g.constant(mix_w), pc), Act::Gelu));
                },
                comps) < 1e-5);

      Tensor<double> restored({3, 3, 1});
      for (auto& v : restored.values) {
        v = eng.uniform(0.1, 1.0);
        if (eng.uniform() < 0.5) v = -v;
      }
      CHECK(finite_diff_check(
                [&](Graph<double>& g, Var x) { return l1_loss(g, x, g.constant(Tensor<double>({3, 3, 1}))); },
                restored) < 1e-5);
    }
  }
}
