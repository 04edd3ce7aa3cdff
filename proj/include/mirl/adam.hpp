// SPDX-License-Identifier: Apache-2.0
//
// Adam with bias correction and mask discipline: gradients of pruned
// weights are zeroed before the moment update and weights are re-masked
// after it, so pruned entries and their moments stay exactly zero.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mirl/pruning.hpp"
#include "mirl/store.hpp"

namespace mirl {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One gradient buffer per store entry, in enumeration order.
using Gradients = std::vector<std::vector<float>>;

struct AdamState {
  std::vector<std::vector<float>> m, v;
  long step = 0;

  static AdamState init_for(const NamedTensorStore<float>& store) {
    AdamState st;
    st.m.reserve(store.size());
    st.v.reserve(store.size());
    for (const auto& e : store.entries()) {
      st.m.emplace_back(e.tensor.size(), 0.0f);
      st.v.emplace_back(e.tensor.size(), 0.0f);
    }
    return st;
  }
};

inline void adam_step(NamedTensorStore<float>& theta, Gradients& grads, AdamState& st, double lr,
                      const SparsityMask& mask, const AdamConfig& cfg = {}) {
  require(grads.size() == theta.size() && st.m.size() == theta.size(), "gradient/state buffers do not match the store");
  mask.validate_against(theta);

  for (std::size_t i = 0; i < theta.size(); ++i) {
    const auto& e = theta.entry(i);
    require(grads[i].size() == e.tensor.size(), "gradient size mismatch for " + e.name);
    for (float g : grads[i])
      if (!std::isfinite(g)) throw std::runtime_error("non-finite gradient in tensor '" + e.name + "'");
  }

  st.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));

  std::size_t mi = 0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    auto& e = theta.entry(i);
    auto& g = grads[i];
    const std::vector<std::uint8_t>* keep = nullptr;
    if (e.prunable) keep = &mask.entries()[mi++].keep;

    for (std::size_t j = 0; j < g.size(); ++j) {
      if (keep && !(*keep)[j]) g[j] = 0.0f;
      const double gj = g[j];
      const double mj = cfg.beta1 * st.m[i][j] + (1.0 - cfg.beta1) * gj;
      const double vj = cfg.beta2 * st.v[i][j] + (1.0 - cfg.beta2) * gj * gj;
      st.m[i][j] = static_cast<float>(mj);
      st.v[i][j] = static_cast<float>(vj);
      const double update = lr * (mj / bc1) / (std::sqrt(vj / bc2) + cfg.eps);
      e.tensor.values[j] = static_cast<float>(e.tensor.values[j] - update);
      if (keep && !(*keep)[j]) e.tensor.values[j] = 0.0f;
    }
  }
}

}  // namespace mirl
