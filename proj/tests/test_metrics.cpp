// SPDX-License-Identifier: Apache-2.0
//
// Metric tests. SSIM is cross-checked against a reference implementation
// written here via centered moments (a different algebraic route from the
// implementation's raw-moment form).
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "mirl/data.hpp"
#include "mirl/metrics.hpp"
#include "test_util.hpp"

using namespace mirl;
using Catch::Approx;
using testutil::rand_tensor;

namespace {

// Reference SSIM: Gaussian window, centered-moment statistics.
template <typename T>
double ssim_reference(const Tensor<T>& x, const Tensor<T>& y, const MetricConfig& cfg) {
  const int H = x.dim(0), W = x.dim(1), C = x.dim(2);
  const int win = cfg.ssim_window, r = win / 2;
  std::vector<double> w(static_cast<std::size_t>(win) * win);
  double wsum = 0.0;
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) {
      const double dy = i - r, dx = j - r;
      w[static_cast<std::size_t>(i) * win + j] = std::exp(-(dy * dy + dx * dx) / (2.0 * cfg.ssim_sigma * cfg.ssim_sigma));
      wsum += w[static_cast<std::size_t>(i) * win + j];
    }
  for (auto& v : w) v /= wsum;

  double total = 0.0;
  std::size_t n = 0;
  for (int c = 0; c < C; ++c)
    for (int cy = r; cy < H - r; ++cy)
      for (int cx = r; cx < W - r; ++cx) {
        double mx = 0.0, my = 0.0;
        std::size_t wi = 0;
        for (int i = -r; i <= r; ++i)
          for (int j = -r; j <= r; ++j, ++wi) {
            mx += w[wi] * x.at(cy + i, cx + j, c);
            my += w[wi] * y.at(cy + i, cx + j, c);
          }
        double vx = 0.0, vy = 0.0, cov = 0.0;
        wi = 0;
        for (int i = -r; i <= r; ++i)
          for (int j = -r; j <= r; ++j, ++wi) {
            const double dx = x.at(cy + i, cx + j, c) - mx;
            const double dy = y.at(cy + i, cx + j, c) - my;
            vx += w[wi] * dx * dx;
            vy += w[wi] * dy * dy;
            cov += w[wi] * dx * dy;
          }
        total += ((2 * mx * my + cfg.c1()) * (2 * cov + cfg.c2())) /
                 ((mx * mx + my * my + cfg.c1()) * (vx + vy + cfg.c2()));
        ++n;
      }
  return total / static_cast<double>(n);
}

}  // namespace

TEST_CASE("mse") {
  rng::Engine eng(5);
  auto x = rand_tensor<float>({6, 6, 3}, eng, 0.0, 1.0);
  CHECK(mse(x, x) == 0.0);

  Tensor<float> zero({4, 4, 3});
  CHECK(mse(zero, Tensor<float>::full({4, 4, 3}, 1.0f)) == 1.0);

  auto y = rand_tensor<float>({6, 6, 3}, eng, 0.0, 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x.values[i]) - y.values[i];
    acc += d * d;
  }
  CHECK(mse(x, y) == Approx(acc / x.size()).margin(1e-9));

  REQUIRE_THROWS_AS(mse(x, zero), std::invalid_argument);
}

TEST_CASE("psnr") {
  MetricConfig cfg;
  SECTION("MSE equal to MAX^2 gives 0 dB") {
    Tensor<float> a({2, 2, 1});
    CHECK(psnr(a, Tensor<float>::full({2, 2, 1}, 1.0f), cfg) == Approx(0.0).margin(1e-12));
  }
  SECTION("MSE of MAX^2/10^4 gives 40 dB") {
    Tensor<float> a({10, 10, 1});
    CHECK(psnr(a, Tensor<float>::full({10, 10, 1}, 0.01f), cfg) == Approx(40.0).margin(1e-4));
  }
  SECTION("identical images give the infinity sentinel") {
    rng::Engine eng(3);
    auto x = rand_tensor<float>({4, 4, 3}, eng, 0.0, 1.0);
    CHECK(std::isinf(psnr(x, x, cfg)));
  }
  SECTION("domain-scale invariance to 1e-9") {
    rng::Engine eng(7);
    auto x = rand_tensor<double>({8, 8, 3}, eng, 0.0, 1.0);
    auto y = rand_tensor<double>({8, 8, 3}, eng, 0.0, 1.0);
    Tensor<double> x255 = x, y255 = y;
    for (auto& v : x255.values) v *= 255.0;
    for (auto& v : y255.values) v *= 255.0;
    MetricConfig c255;
    c255.max_value = 255.0;
    CHECK(psnr(x, y, cfg) == Approx(psnr(x255, y255, c255)).margin(1e-9));
  }
}

TEST_CASE("ssim") {
  MetricConfig cfg;
  rng::Engine eng(11);

  SECTION("identical images score 1") {
    auto x = rand_tensor<float>({16, 16, 3}, eng, 0.0, 1.0);
    CHECK(ssim(x, x, cfg) == Approx(1.0).margin(1e-9));
  }
  SECTION("constant 0 vs constant MAX reduces to C1/(MAX^2+C1)") {
    Tensor<float> a({12, 12, 1});
    Tensor<float> b = Tensor<float>::full({12, 12, 1}, 1.0f);
    CHECK(ssim(a, b, cfg) == Approx(0.0001 / 1.0001).margin(1e-9));
  }
  SECTION("random pairs match the centered-moment reference") {
    for (int trial = 0; trial < 4; ++trial) {
      auto x = rand_tensor<float>({16, 16, 3}, eng, 0.0, 1.0);
      auto y = rand_tensor<float>({16, 16, 3}, eng, 0.0, 1.0);
      CHECK(ssim(x, y, cfg) == Approx(ssim_reference(x, y, cfg)).margin(1e-6));
    }
  }
  SECTION("symmetry") {
    auto x = rand_tensor<float>({16, 16, 3}, eng, 0.0, 1.0);
    auto y = rand_tensor<float>({16, 16, 3}, eng, 0.0, 1.0);
    CHECK(ssim(x, y, cfg) == Approx(ssim(y, x, cfg)).margin(1e-9));
  }
  SECTION("images smaller than the window are rejected") {
    Tensor<float> tiny({8, 8, 1});
    REQUIRE_THROWS_AS(ssim(tiny, tiny, cfg), std::invalid_argument);
  }
}

TEST_CASE("psnr decreases as noise grows") {
  auto cleans = gen_clean(4, 32, 99);
  double last = std::numeric_limits<double>::infinity();
  for (double sigma : {5.0, 15.0, 25.0, 50.0}) {
    double acc = 0.0;
    int n = 0;
    for (std::uint64_t s = 0; s < 4; ++s) {
      for (std::size_t i = 0; i < cleans.size(); ++i) {
        DegradationSpec spec;
        spec.kind = DegradationSpec::Kind::Noise;
        spec.noise_sigma = sigma;
        spec.seed = rng::mix({s, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(sigma)});
        auto pair = degrade(cleans[i], spec);
        acc += psnr(pair.degraded, pair.clean);
        ++n;
      }
    }
    const double mean = acc / n;
    CHECK(mean < last);
    last = mean;
  }
}
