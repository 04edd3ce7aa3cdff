// SPDX-License-Identifier: Apache-2.0
//
// Linear warmup followed by cosine annealing, stepped per epoch:
//
//   t in [0, j_w)   eta_start + t/(j_w-1) * (eta_base - eta_start)
//   t in [j_w, j]   eta_min + (eta_base - eta_min)/2 * (1 + cos((t-j_w)*pi/(j-j_w)))
#pragma once

#include <cmath>

#include "mirl/tensor.hpp"

namespace mirl {

struct ScheduleConfig {
  double eta_start = 1e-6;
  double eta_base = 2e-4;
  double eta_min = 1e-6;
  int total_epochs = 120;
  int warmup_epochs = 15;

  void validate() const {
    require(eta_min >= 0.0 && eta_min <= eta_base, "need 0 <= eta_min <= eta_base");
    require(eta_start >= 0.0 && eta_start <= eta_base, "need 0 <= eta_start <= eta_base");
    require(warmup_epochs > 0 && warmup_epochs < total_epochs, "need 0 < warmup < total epochs");
  }
};

inline double lr_at(int t, const ScheduleConfig& cfg) {
  cfg.validate();
  require(t >= 0 && t <= cfg.total_epochs, "epoch index " + std::to_string(t) + " outside [0, " + std::to_string(cfg.total_epochs) + "]");
  if (t < cfg.warmup_epochs) {
    if (cfg.warmup_epochs == 1) return cfg.eta_start;  // degenerate single-epoch warmup
    return cfg.eta_start + static_cast<double>(t) / (cfg.warmup_epochs - 1) * (cfg.eta_base - cfg.eta_start);
  }
  const double phase = static_cast<double>(t - cfg.warmup_epochs) * 3.14159265358979323846 /
                       static_cast<double>(cfg.total_epochs - cfg.warmup_epochs);
  return cfg.eta_min + 0.5 * (cfg.eta_base - cfg.eta_min) * (1.0 + std::cos(phase));
}

}  // namespace mirl
