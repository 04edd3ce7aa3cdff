// SPDX-License-Identifier: Apache-2.0
//
// Central-difference gradient verification. Everything runs in double:
// the graph is instantiated with T=double so truncation error ~eps^2
// dominates and 1e-5 relative tolerances are meaningful.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mirl/graph.hpp"
#include "mirl/ops.hpp"
#include "mirl/parallel.hpp"

namespace mirl {

// build: (Graph<double>&, Var point) -> Var, must produce a scalar and be a
// pure function of the point tensor (safe to call concurrently).
// Returns max over coordinates of |analytic - numeric| / max(1, |analytic|).
template <typename BuildFn>
double finite_diff_check(BuildFn&& build, const Tensor<double>& point, double eps = 1e-3, int threads = 1) {
  require(eps > 0, "finite_diff_check: eps must be positive");

  Graph<double> g;
  Var x = g.leaf(point, true);
  Var loss = build(g, x);
  require(g.value(loss).size() == 1, "finite_diff_check: function must be scalar-valued");
  g.backward(loss);
  const Tensor<double> analytic = g.grad(x);

  auto eval = [&build](const Tensor<double>& p) {
    Graph<double> gf;
    Var xx = gf.leaf(p, false);
    Var out = build(gf, xx);
    return gf.value(out).values[0];
  };

  std::vector<double> errs(point.size(), 0.0);
  parallel_for(point.size(), threads, [&](std::size_t i) {
    Tensor<double> p = point;
    p.values[i] = point.values[i] + eps;
    const double fp = eval(p);
    p.values[i] = point.values[i] - eps;
    const double fm = eval(p);
    const double numeric = (fp - fm) / (2.0 * eps);
    const double a = analytic.values[i];
    errs[i] = std::abs(a - numeric) / std::max(1.0, std::abs(a));
  });
  double worst = 0.0;
  for (double e : errs) worst = std::max(worst, e);
  return worst;
}

}  // namespace mirl
