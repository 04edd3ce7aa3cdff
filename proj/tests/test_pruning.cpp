// SPDX-License-Identifier: Apache-2.0
//
// Pruning tests. Counts are cross-checked against an independent
// stable-sort oracle and the floor recurrence s_{k+1} = s_k - floor(p*s_k)
// evaluated here, not via the implementation.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mirl/pruning.hpp"
#include "mirl/rng.hpp"
#include "test_util.hpp"

using namespace mirl;
using Catch::Approx;
using testutil::rand_tensor;

namespace {

NamedTensorStore<float> single_layer(std::vector<float> values, bool output_layer = false) {
  const int n = static_cast<int>(values.size());
  NamedTensorStore<float> s;
  s.add("w", Tensor<float>({n}, std::move(values)), true, output_layer);
  return s;
}

NamedTensorStore<float> two_layers(std::vector<float> a, std::vector<float> b) {
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());
  NamedTensorStore<float> s;
  s.add("a", Tensor<float>({na}, std::move(a)), true);
  s.add("b", Tensor<float>({nb}, std::move(b)), true);
  return s;
}

std::size_t survivors_of(const SparsityMask& m) { return m.survivors(); }

// Oracle: the set of pruned positions must be the n smallest by
// (|value|, tensor order, index).
std::vector<std::pair<std::size_t, std::size_t>> smallest_n(const NamedTensorStore<float>& store,
                                                            const SparsityMask& before, std::size_t n) {
  struct Item {
    float mag;
    std::size_t t, i;
  };
  std::vector<Item> items;
  std::size_t mi = 0;
  for (const auto& e : store.entries()) {
    if (!e.prunable) continue;
    for (std::size_t i = 0; i < e.tensor.size(); ++i)
      if (before.entries()[mi].keep[i]) items.push_back({std::abs(e.tensor.values[i]), mi, i});
    ++mi;
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
    if (x.mag != y.mag) return x.mag < y.mag;
    if (x.t != y.t) return x.t < y.t;
    return x.i < y.i;
  });
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n && i < items.size(); ++i) out.emplace_back(items[i].t, items[i].i);
  return out;
}

}  // namespace

TEST_CASE("sparsity") {
  auto s = single_layer({1, 2, 3, 4});
  auto m = SparsityMask::ones_like(s);
  CHECK(sparsity(m) == 0.0);

  m.entries()[0].keep = {1, 0, 1, 0};
  CHECK(sparsity(m) == 0.5);

  SECTION("three global rounds at p=0.2 on 1000 weights leave 512 survivors") {
    // floor recurrence evaluated by hand: 1000 -> 800 -> 640 -> 512
    rng::Engine eng(2);
    std::vector<float> v(1000);
    for (auto& x : v) x = static_cast<float>(eng.uniform(0.1, 2.0));
    auto store = single_layer(v);
    auto mask = SparsityMask::ones_like(store);
    std::size_t expect = 1000;
    for (int k = 0; k < 3; ++k) {
      mask = prune_step_global(store, mask, 0.2).mask;
      expect -= static_cast<std::size_t>(0.2 * static_cast<double>(expect));
    }
    CHECK(expect == 512);
    CHECK(survivors_of(mask) == 512);
    CHECK(sparsity(mask) == Approx(0.488));
  }
}

TEST_CASE("prune_step_global") {
  SECTION("removes the smallest magnitudes") {
    auto store = single_layer({0.5f, 0.1f, 0.9f, 0.2f, 1.0f, 0.3f, 0.7f, 0.4f, 0.8f, 0.6f});
    auto out = prune_step_global(store, SparsityMask::ones_like(store), 0.2);
    CHECK(out.pruned == 2);
    CHECK(out.mask.entries()[0].keep == std::vector<std::uint8_t>{1, 0, 1, 0, 1, 1, 1, 1, 1, 1});
  }
  SECTION("floor to zero is a no-op with a warning signal") {
    auto store = single_layer({0.5f, 0.1f, 0.9f});
    auto before = SparsityMask::ones_like(store);
    auto out = prune_step_global(store, before, 0.2);  // floor(0.6) = 0
    CHECK(out.pruned == 0);
    CHECK(out.mask == before);
  }
  SECTION("pools across layers") {
    auto store = two_layers({0.01f, 0.9f}, {0.5f, 0.6f});
    auto out = prune_step_global(store, SparsityMask::ones_like(store), 0.25);
    CHECK(out.pruned == 1);
    CHECK(out.mask.entries()[0].keep == std::vector<std::uint8_t>{0, 1});
    CHECK(out.mask.entries()[1].keep == std::vector<std::uint8_t>{1, 1});
  }
  SECTION("count and selection match the sort oracle on random sizes") {
    for (std::size_t size : {1u, 2u, 17u, 256u, 4001u, 10000u}) {
      rng::Engine eng(size);
      std::vector<float> v(size);
      for (auto& x : v) x = static_cast<float>(eng.uniform(-1.0, 1.0));
      auto store = single_layer(v);
      auto before = SparsityMask::ones_like(store);
      auto out = prune_step_global(store, before, 0.3);
      const std::size_t n = static_cast<std::size_t>(0.3 * static_cast<double>(size));
      CHECK(out.pruned == n);
      CHECK(survivors_of(out.mask) == size - n);
      for (auto [t, i] : smallest_n(store, before, n)) CHECK(out.mask.entries()[t].keep[i] == 0);
    }
  }
}

TEST_CASE("prune_step_layerwise") {
  SECTION("each layer loses its own smallest") {
    auto store = two_layers({0.01f, 0.9f}, {0.5f, 0.6f});
    auto out = prune_step_layerwise(store, SparsityMask::ones_like(store), 0.5);
    CHECK(out.pruned == 2);
    CHECK(out.mask.entries()[0].keep == std::vector<std::uint8_t>{0, 1});
    CHECK(out.mask.entries()[1].keep == std::vector<std::uint8_t>{0, 1});
  }
  SECTION("output layer is pruned at half rate") {
    NamedTensorStore<float> store;
    std::vector<float> ten = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    store.add("hidden", Tensor<float>({10}, std::vector<float>(ten)), true, false);
    store.add("out", Tensor<float>({10}, std::vector<float>(ten)), true, true);
    auto out = prune_step_layerwise(store, SparsityMask::ones_like(store), 0.2, 0.5);
    std::size_t hidden_pruned = 10 - std::accumulate(out.mask.entries()[0].keep.begin(), out.mask.entries()[0].keep.end(), std::size_t{0});
    std::size_t out_pruned = 10 - std::accumulate(out.mask.entries()[1].keep.begin(), out.mask.entries()[1].keep.end(), std::size_t{0});
    CHECK(hidden_pruned == 2);
    CHECK(out_pruned == 1);
  }
  SECTION("rates that floor to zero change nothing") {
    auto store = two_layers({0.3f, 0.7f, 0.9f}, {0.2f, 0.8f});
    auto before = SparsityMask::ones_like(store);
    auto out = prune_step_layerwise(store, before, 0.1);
    CHECK(out.pruned == 0);
    CHECK(out.mask == before);
  }
}

TEST_CASE("prune_step_random") {
  SECTION("count rule") {
    auto store = single_layer(std::vector<float>(10, 1.0f));
    auto out = prune_step_random(SparsityMask::ones_like(store), 0.9, 5);
    CHECK(out.pruned == 9);
    CHECK(survivors_of(out.mask) == 1);
  }
  SECTION("seed determinism") {
    auto store = single_layer(std::vector<float>(100, 1.0f));
    auto a = prune_step_random(SparsityMask::ones_like(store), 0.3, 77);
    auto b = prune_step_random(SparsityMask::ones_like(store), 0.3, 77);
    CHECK(a.mask == b.mask);
    auto c = prune_step_random(SparsityMask::ones_like(store), 0.3, 78);
    CHECK(!(a.mask == c.mask));
  }
  SECTION("selection is uniform over 10000 trials") {
    auto store = single_layer(std::vector<float>(10, 1.0f));
    auto ones = SparsityMask::ones_like(store);
    std::vector<int> pruned_count(10, 0);
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
      auto out = prune_step_random(ones, 0.3, static_cast<std::uint64_t>(t));
      for (int i = 0; i < 10; ++i)
        if (!out.mask.entries()[0].keep[static_cast<std::size_t>(i)]) ++pruned_count[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < 10; ++i) {
      const double freq = pruned_count[static_cast<std::size_t>(i)] / static_cast<double>(trials);
      CHECK(freq == Approx(0.3).margin(0.02));
    }
  }
}

TEST_CASE("rewind and apply_mask") {
  rng::Engine eng(93);
  NamedTensorStore<float> theta0;
  theta0.add("k1", rand_tensor<float>({3, 3, 2, 2}, eng), true);
  theta0.add("b1", rand_tensor<float>({2}, eng), false);
  theta0.add("k2", rand_tensor<float>({1, 1, 2, 4}, eng), true, true);

  SECTION("all-ones mask rewinds to theta0 exactly") {
    auto theta = rewind(theta0, SparsityMask::ones_like(theta0));
    CHECK(theta.bit_equal(theta0));
  }
  SECTION("all-zeros mask zeroes prunable tensors, biases keep theta0") {
    auto mask = SparsityMask::ones_like(theta0);
    for (auto& e : mask.entries()) std::fill(e.keep.begin(), e.keep.end(), std::uint8_t{0});
    auto theta = rewind(theta0, mask);
    for (float v : theta.tensor("k1").values) CHECK(v == 0.0f);
    for (float v : theta.tensor("k2").values) CHECK(v == 0.0f);
    CHECK(theta.tensor("b1").values == theta0.tensor("b1").values);
  }
  SECTION("random mask agrees with the elementwise select oracle bit-exactly") {
    auto mask = SparsityMask::ones_like(theta0);
    rng::Engine e2(4);
    for (auto& e : mask.entries())
      for (auto& b : e.keep) b = e2.uniform() < 0.5 ? 0 : 1;
    auto theta = rewind(theta0, mask);
    std::size_t mi = 0;
    for (const auto& e : theta0.entries()) {
      if (!e.prunable) continue;
      for (std::size_t i = 0; i < e.tensor.size(); ++i) {
        const float want = mask.entries()[mi].keep[i] ? e.tensor.values[i] : 0.0f;
        CHECK(theta.tensor(e.name).values[i] == want);
      }
      ++mi;
    }
  }
  SECTION("apply_mask is idempotent and exact") {
    auto mask = SparsityMask::ones_like(theta0);
    mask.entries()[0].keep[0] = 0;
    mask.entries()[1].keep[3] = 0;
    auto once = apply_mask(theta0, mask);
    auto twice = apply_mask(once, mask);
    CHECK(once.bit_equal(twice));
    CHECK(once.tensor("k1").values[0] == 0.0f);
    CHECK(once.tensor("k2").values[3] == 0.0f);
    CHECK(once.tensor("k1").values[1] == theta0.tensor("k1").values[1]);

    auto unchanged = apply_mask(theta0, SparsityMask::ones_like(theta0));
    CHECK(unchanged.bit_equal(theta0));
  }
  SECTION("misaligned mask is rejected") {
    NamedTensorStore<float> other;
    other.add("k1", rand_tensor<float>({2, 2, 1, 1}, eng), true);
    REQUIRE_THROWS_AS(rewind(other, SparsityMask::ones_like(theta0)), std::invalid_argument);
  }
}

TEST_CASE("compression accounting") {
  CHECK(format_compression(compression_rate(35.6e6, 4.7e6)) == "x7.57");
  CHECK(format_compression(compression_rate(100, 100)) == "x1.00");
  CHECK(format_compression(compression_rate(100, 25)) == "x4.00");
  REQUIRE_THROWS_AS(compression_rate(10, 0), std::invalid_argument);
}

TEST_CASE("expected_density") {
  CHECK(expected_density(0, 0.2) == 1.0);
  CHECK(expected_density(1, 0.2) == Approx(0.8));
  CHECK(expected_density(15, 0.2) == Approx(0.0352).margin(5e-5));
}

TEST_CASE("pruning invariants") {
  rng::Engine eng(1234);
  NamedTensorStore<float> store;
  store.add("a", rand_tensor<float>({3, 3, 4, 8}, eng), true);
  store.add("bias", rand_tensor<float>({8}, eng), false);
  store.add("b", rand_tensor<float>({1, 1, 8, 16}, eng), true);
  store.add("out", rand_tensor<float>({3, 3, 4, 3}, eng), true, true);

  SECTION("survivor sets only shrink, sparsity never decreases") {
    auto mask = SparsityMask::ones_like(store);
    double last_sparsity = sparsity(mask);
    for (int round = 0; round < 6; ++round) {
      SparsityMask prev = mask;
      switch (round % 3) {
        case 0: mask = prune_step_global(store, mask, 0.2).mask; break;
        case 1: mask = prune_step_layerwise(store, mask, 0.2).mask; break;
        default: mask = prune_step_random(mask, 0.2, static_cast<std::uint64_t>(round)).mask; break;
      }
      for (std::size_t t = 0; t < mask.entries().size(); ++t)
        for (std::size_t i = 0; i < mask.entries()[t].keep.size(); ++i)
          CHECK(mask.entries()[t].keep[i] <= prev.entries()[t].keep[i]);  // no revival
      CHECK(sparsity(mask) >= last_sparsity);
      last_sparsity = sparsity(mask);
    }
  }

  SECTION("selection is invariant under positive rescaling") {
    for (double c : {0.5, 2.0, 3.7}) {
      NamedTensorStore<float> scaled = store;
      for (auto& e : scaled.entries())
        if (e.prunable)
          for (auto& v : e.tensor.values) v *= static_cast<float>(c);
      auto mask = SparsityMask::ones_like(store);
      for (int round = 0; round < 3; ++round) {
        auto a = prune_step_global(store, mask, 0.25);
        auto b = prune_step_global(scaled, mask, 0.25);
        CHECK(a.mask == b.mask);
        auto la = prune_step_layerwise(store, mask, 0.25);
        auto lb = prune_step_layerwise(scaled, mask, 0.25);
        CHECK(la.mask == lb.mask);
        mask = a.mask;
      }
    }
  }

  SECTION("rewind after pruning leaves survivors bit-equal to theta0") {
    auto mask = prune_step_global(store, SparsityMask::ones_like(store), 0.3).mask;
    auto theta = rewind(store, mask);
    std::size_t mi = 0;
    for (const auto& e : store.entries()) {
      if (!e.prunable) continue;
      for (std::size_t i = 0; i < e.tensor.size(); ++i)
        if (mask.entries()[mi].keep[i]) CHECK(theta.tensor(e.name).values[i] == e.tensor.values[i]);
      ++mi;
    }
  }
}
