// SPDX-License-Identifier: Apache-2.0
//
// Mask algebra for iterative magnitude pruning with weight rewinding.
//
// The percentile threshold is realised as an exact count: a pruning step
// removes floor(p * survivors) of the smallest-magnitude surviving
// entries. The candidate pool is survivors only (already-pruned zeros
// never re-enter the ranking) and ties break by (tensor order, element
// index) ascending, so masks are fully deterministic. Pruned weights
// never revive: every step only clears bits.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "mirl/rng.hpp"
#include "mirl/store.hpp"

namespace mirl {

class SparsityMask {
 public:
  struct Entry {
    std::string name;
    std::vector<std::uint8_t> keep;  // one byte per element, 1 = surviving
  };

  SparsityMask() = default;

  template <typename T>
  static SparsityMask ones_like(const NamedTensorStore<T>& store) {
    SparsityMask m;
    for (const auto& e : store.entries())
      if (e.prunable) m.entries_.push_back(Entry{e.name, std::vector<std::uint8_t>(e.tensor.size(), 1)});
    return m;
  }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.keep.size();
    return n;
  }

  std::size_t survivors() const {
    std::size_t n = 0;
    for (const auto& e : entries_)
      for (std::uint8_t b : e.keep) n += b;
    return n;
  }

  bool operator==(const SparsityMask& o) const {
    if (entries_.size() != o.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].name != o.entries_[i].name || entries_[i].keep != o.entries_[i].keep) return false;
    return true;
  }

  // Prunable entries of `store`, in enumeration order, must line up
  // one-to-one with the mask.
  template <typename T>
  void validate_against(const NamedTensorStore<T>& store) const {
    std::size_t mi = 0;
    for (const auto& e : store.entries()) {
      if (!e.prunable) continue;
      require(mi < entries_.size(), "mask has fewer entries than the store has prunable tensors");
      require(entries_[mi].name == e.name, "mask entry '" + entries_[mi].name + "' does not align with parameter '" + e.name + "'");
      require(entries_[mi].keep.size() == e.tensor.size(), "mask length mismatch for '" + e.name + "'");
      ++mi;
    }
    require(mi == entries_.size(), "mask has more entries than the store has prunable tensors");
  }

 private:
  std::vector<Entry> entries_;
};

inline double sparsity(const SparsityMask& m) {
  const std::size_t total = m.total();
  require(total > 0, "sparsity of an empty mask is undefined");
  return 1.0 - static_cast<double>(m.survivors()) / static_cast<double>(total);
}

struct PruneConfig {
  enum class Scope { Global, Layerwise };

  double rate = 0.2;
  double target_sparsity = 0.9;
  Scope scope = Scope::Global;
  double output_layer_factor = 0.5;
  int max_rounds = 15;

  void validate() const {
    require(rate > 0.0 && rate < 1.0, "prune rate must be in (0,1)");
    require(target_sparsity > 0.0 && target_sparsity < 1.0, "target sparsity must be in (0,1)");
    require(output_layer_factor > 0.0 && output_layer_factor <= 1.0, "output_layer_factor must be in (0,1]");
    require(max_rounds >= 0, "max_rounds must be non-negative");
  }
};

// pruned == 0 signals a no-op step (floor(p * survivors) < 1).
struct PruneOutcome {
  SparsityMask mask;
  std::size_t pruned = 0;
};

namespace detail {

template <typename T>
struct Candidate {
  T mag;
  std::uint32_t tensor;
  std::uint64_t elem;
  bool operator<(const Candidate& o) const {
    if (mag != o.mag) return mag < o.mag;
    if (tensor != o.tensor) return tensor < o.tensor;
    return elem < o.elem;
  }
};

template <typename T>
void prune_smallest(const Tensor<T>& values, std::vector<Candidate<T>>& pool, std::uint32_t tensor_idx,
                    const std::vector<std::uint8_t>& keep) {
  for (std::size_t i = 0; i < keep.size(); ++i)
    if (keep[i]) pool.push_back(Candidate<T>{static_cast<T>(std::abs(values.values[i])), tensor_idx, i});
}

}  // namespace detail

// Pools surviving weights across all prunable tensors and clears the
// floor(p * survivors) smallest magnitudes.
template <typename T>
PruneOutcome prune_step_global(const NamedTensorStore<T>& theta, const SparsityMask& mask, double p) {
  require(p > 0.0 && p < 1.0, "prune rate must be in (0,1)");
  mask.validate_against(theta);
  PruneOutcome out{mask, 0};

  std::vector<detail::Candidate<T>> pool;
  pool.reserve(mask.survivors());
  std::uint32_t mi = 0;
  for (const auto& e : theta.entries()) {
    if (!e.prunable) continue;
    detail::prune_smallest(e.tensor, pool, mi, mask.entries()[mi].keep);
    ++mi;
  }
  const std::size_t n = static_cast<std::size_t>(p * static_cast<double>(pool.size()));
  if (n < 1) return out;

  std::sort(pool.begin(), pool.end());
  for (std::size_t i = 0; i < n; ++i) out.mask.entries()[pool[i].tensor].keep[pool[i].elem] = 0;
  out.pruned = n;
  return out;
}

// Per-tensor ranking; the output layer is pruned at rate
// p * output_layer_factor, every other tensor at p.
template <typename T>
PruneOutcome prune_step_layerwise(const NamedTensorStore<T>& theta, const SparsityMask& mask, double p,
                                  double output_layer_factor = 0.5) {
  require(p > 0.0 && p < 1.0, "prune rate must be in (0,1)");
  require(output_layer_factor > 0.0 && output_layer_factor <= 1.0, "output_layer_factor must be in (0,1]");
  mask.validate_against(theta);
  PruneOutcome out{mask, 0};

  std::uint32_t mi = 0;
  for (const auto& e : theta.entries()) {
    if (!e.prunable) continue;
    std::vector<detail::Candidate<T>> pool;
    detail::prune_smallest(e.tensor, pool, mi, mask.entries()[mi].keep);
    const double rate = e.output_layer ? p * output_layer_factor : p;
    const std::size_t n = static_cast<std::size_t>(rate * static_cast<double>(pool.size()));
    if (n >= 1) {
      std::sort(pool.begin(), pool.end());
      for (std::size_t i = 0; i < n; ++i) out.mask.entries()[mi].keep[pool[i].elem] = 0;
      out.pruned += n;
    }
    ++mi;
  }
  return out;
}

// Clears floor(p * survivors) surviving entries chosen uniformly without
// replacement.
inline PruneOutcome prune_step_random(const SparsityMask& mask, double p, std::uint64_t seed) {
  require(p > 0.0 && p < 1.0, "prune rate must be in (0,1)");
  PruneOutcome out{mask, 0};

  std::vector<std::pair<std::uint32_t, std::uint64_t>> survivors;
  survivors.reserve(mask.survivors());
  for (std::uint32_t mi = 0; mi < mask.entries().size(); ++mi) {
    const auto& keep = mask.entries()[mi].keep;
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (keep[i]) survivors.emplace_back(mi, i);
  }
  const std::size_t n = static_cast<std::size_t>(p * static_cast<double>(survivors.size()));
  if (n < 1) return out;

  rng::Engine eng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = static_cast<std::size_t>(eng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(survivors.size()) - 1));
    std::swap(survivors[i], survivors[j]);
    out.mask.entries()[survivors[i].first].keep[survivors[i].second] = 0;
  }
  out.pruned = n;
  return out;
}

// theta = mask (*) theta0: survivors are bit-equal to their initial
// values, pruned entries exactly zero, non-prunable tensors reset to
// theta0 untouched by the mask.
template <typename T>
NamedTensorStore<T> rewind(const NamedTensorStore<T>& theta0, const SparsityMask& mask) {
  mask.validate_against(theta0);
  NamedTensorStore<T> theta = theta0;
  std::size_t mi = 0;
  for (auto& e : theta.entries()) {
    if (!e.prunable) continue;
    const auto& keep = mask.entries()[mi].keep;
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (!keep[i]) e.tensor.values[i] = T(0);
    ++mi;
  }
  return theta;
}

// Forces masked entries of prunable tensors to exactly zero; surviving
// entries and non-prunable tensors are untouched.
template <typename T>
NamedTensorStore<T> apply_mask(NamedTensorStore<T> theta, const SparsityMask& mask) {
  mask.validate_against(theta);
  std::size_t mi = 0;
  for (auto& e : theta.entries()) {
    if (!e.prunable) continue;
    const auto& keep = mask.entries()[mi].keep;
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (!keep[i]) e.tensor.values[i] = T(0);
    ++mi;
  }
  return theta;
}

inline double compression_rate(double dense_count, double sparse_count) {
  require(sparse_count > 0, "compression rate needs a positive surviving count");
  return dense_count / sparse_count;
}

// Two-decimal presentation, e.g. "x7.57".
inline std::string format_compression(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "x%.2f", ratio);
  return buf;
}

// Idealised density after k rounds at rate p; exact survivor counts follow
// the floor recurrence s_{k+1} = s_k - floor(p * s_k).
inline double expected_density(int k, double p) {
  require(k >= 0, "round count must be non-negative");
  require(p > 0.0 && p < 1.0, "prune rate must be in (0,1)");
  return std::pow(1.0 - p, k);
}

}  // namespace mirl
