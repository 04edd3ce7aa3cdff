// SPDX-License-Identifier: Apache-2.0
//
// Masked training and the iterative prune-and-rewind loop.
//
// Per round: train under the current mask, prune the trained weights
// (global or layer-wise), rewind survivors to their initial values, reset
// optimizer state and schedule, retrain. Batches run one graph per sample
// (possibly on worker threads) and gradients reduce in slot order, so
// results are bit-identical for any thread count.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "mirl/adam.hpp"
#include "mirl/data.hpp"
#include "mirl/metrics.hpp"
#include "mirl/model.hpp"
#include "mirl/parallel.hpp"
#include "mirl/pruning.hpp"
#include "mirl/schedule.hpp"

namespace mirl {

struct TrainConfig {
  int epochs = 120;
  int warmup_epochs = 15;
  int batch_size = 8;
  double lr_start = 1e-6;
  double lr_base = 2e-4;
  double lr_min = 1e-6;
  AdamConfig adam{};
  std::uint64_t seed = 0;
  int patch = 64;
  bool clamp_eval = true;
  bool augment = true;
  double val_fraction = 0.1;
  int threads = 0;  // 0 = hardware concurrency

  ScheduleConfig schedule() const { return ScheduleConfig{lr_start, lr_base, lr_min, epochs, warmup_epochs}; }

  void validate() const {
    require(epochs >= 1, "need at least one epoch");
    require(batch_size >= 1, "batch size must be positive");
    require(patch >= 8 && patch % 8 == 0, "patch must be a positive multiple of 8");
    require(val_fraction >= 0.0 && val_fraction < 1.0, "val_fraction must be in [0,1)");
    schedule().validate();
  }
};

struct EpochStat {
  int round = 0;
  int epoch = 0;
  double lr = 0;
  double train_loss = 0;
  double val_loss = 0;
  double val_psnr = 0;
};

struct StepInfo {
  int round = 0;
  int epoch = 0;
  int step = 0;
  double loss = 0;
};

using StepObserver = std::function<void(const StepInfo&, const NamedTensorStore<float>&, const SparsityMask&)>;

struct TrainOutcome {
  std::vector<EpochStat> trace;
  int best_val_epoch = -1;
};

struct EvalRecord {
  double psnr = 0;
  double ssim = 0;
  int epoch_of_best_validation = -1;
  std::size_t params_surviving = 0;
};

namespace detail {

struct SampleResult {
  double loss = 0;
  Gradients grads;
};

inline ImagePair prepare_sample(const ImagePair& pair, const TrainConfig& cfg, std::uint64_t sample_seed) {
  ImagePair prepared = pair;
  if (cfg.patch < pair.clean.dim(0) || cfg.patch < pair.clean.dim(1))
    prepared = crop_patch(prepared, cfg.patch, rng::mix({sample_seed, 0x63726F70ULL})).pair;
  if (cfg.augment) prepared = augment_flip(prepared, rng::mix({sample_seed, 0x666C6970ULL}));
  return prepared;
}

inline SampleResult sample_grads(const MicroPromptNet& net, const ImagePair& sample) {
  Graph<float> g;
  ParamVars pv = bind_params(g, net.params(), true);
  Var out = build_forward(g, net.config(), pv, g.constant(sample.degraded));
  Var loss = l1_loss(g, out, g.constant(sample.clean));
  SampleResult res;
  res.loss = g.value(loss).values[0];
  g.backward(loss);
  res.grads.reserve(pv.items.size());
  for (const auto& [name, var] : pv.items) res.grads.push_back(g.grad(var).values);
  return res;
}

inline double val_l1(const Tensor<float>& a, const Tensor<float>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(static_cast<double>(a.values[i]) - b.values[i]);
  return acc / static_cast<double>(a.size());
}

}  // namespace detail

// Mean validation metrics; images evaluated in parallel, reduced in order.
inline std::pair<double, double> validate_pass(const MicroPromptNet& net, const std::vector<ImagePair>& val,
                                               bool clamp, int threads, const MetricConfig& mcfg = {}) {
  if (val.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  std::vector<std::pair<double, double>> per(val.size());
  parallel_for(val.size(), threads, [&](std::size_t i) {
    Tensor<float> restored = forward_eval(net, val[i].degraded, clamp);
    per[i] = {detail::val_l1(restored, val[i].clean), psnr(restored, val[i].clean, mcfg)};
  });
  double loss = 0.0, p = 0.0;
  for (const auto& [l, q] : per) {
    loss += l;
    p += q;
  }
  return {loss / static_cast<double>(val.size()), p / static_cast<double>(val.size())};
}

// Algorithm core for one training cycle: seeded shuffled batches, L1 loss,
// masked Adam steps, per-epoch validation.
inline TrainOutcome train_epochs(MicroPromptNet& net, const std::vector<ImagePair>& train_pairs,
                                 const std::vector<ImagePair>& val_pairs, const SparsityMask& mask,
                                 const TrainConfig& cfg, int round = 0, const StepObserver* on_step = nullptr) {
  cfg.validate();
  require(!train_pairs.empty(), "training set is empty");
  const std::size_t batches = train_pairs.size() / static_cast<std::size_t>(cfg.batch_size);
  require(batches >= 1, "batch size " + std::to_string(cfg.batch_size) + " exceeds the training set of " +
                            std::to_string(train_pairs.size()));
  mask.validate_against(net.params());

  const ScheduleConfig sched = cfg.schedule();
  AdamState state = AdamState::init_for(net.params());
  const int threads = cfg.threads;

  std::vector<std::size_t> order(train_pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainOutcome out;
  double best_val = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(epoch, sched);
    rng::Engine shuffler(rng::mix({cfg.seed, 0x73687566ULL, static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(epoch)}));
    shuffler.shuffle(order.begin(), order.end());

    double epoch_loss = 0.0;
    for (std::size_t step = 0; step < batches; ++step) {
      const std::size_t b0 = step * static_cast<std::size_t>(cfg.batch_size);
      std::vector<detail::SampleResult> results(static_cast<std::size_t>(cfg.batch_size));
      parallel_for(static_cast<std::size_t>(cfg.batch_size), threads, [&](std::size_t s) {
        const ImagePair& pair = train_pairs[order[b0 + s]];
        const std::uint64_t sample_seed = rng::mix({cfg.seed, static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(epoch),
                                                    static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(s), pair.aug_seed});
        results[s] = detail::sample_grads(net, detail::prepare_sample(pair, cfg, sample_seed));
      });

      // slot-order reduction keeps numerics independent of scheduling
      Gradients batch = std::move(results[0].grads);
      double loss = results[0].loss;
      for (std::size_t s = 1; s < results.size(); ++s) {
        loss += results[s].loss;
        for (std::size_t i = 0; i < batch.size(); ++i) {
          const auto& src = results[s].grads[i];
          for (std::size_t j = 0; j < src.size(); ++j) batch[i][j] += src[j];
        }
      }
      const float inv = 1.0f / static_cast<float>(cfg.batch_size);
      for (auto& gbuf : batch)
        for (auto& v : gbuf) v *= inv;
      loss /= cfg.batch_size;

      adam_step(net.params(), batch, state, lr, mask, cfg.adam);
      epoch_loss += loss;
      if (on_step && *on_step) (*on_step)(StepInfo{round, epoch, static_cast<int>(step), loss}, net.params(), mask);
    }

    const auto [val_loss, val_psnr] = validate_pass(net, val_pairs, cfg.clamp_eval, threads);
    EpochStat stat{round, epoch, lr, epoch_loss / static_cast<double>(batches), val_loss, val_psnr};
    out.trace.push_back(stat);
    const double score = val_pairs.empty() ? stat.train_loss : val_loss;
    if (score < best_val) {
      best_val = score;
      out.best_val_epoch = epoch;
    }
  }
  return out;
}

// Mean test-set quality of a (masked) net; outputs clamped to [0,1] before
// metrics unless disabled.
inline EvalRecord evaluate(const MicroPromptNet& net, const std::vector<ImagePair>& test, const SparsityMask& mask,
                           const MetricConfig& mcfg = {}, bool clamp = true, int threads = 0) {
  EvalRecord rec;
  rec.params_surviving = mask.survivors();
  if (test.empty()) return rec;
  std::vector<std::pair<double, double>> per(test.size());
  parallel_for(test.size(), threads, [&](std::size_t i) {
    Tensor<float> restored = forward_eval(net, test[i].degraded, clamp);
    per[i] = {psnr(restored, test[i].clean, mcfg), ssim(restored, test[i].clean, mcfg)};
  });
  for (const auto& [p, s] : per) {
    rec.psnr += p;
    rec.ssim += s;
  }
  rec.psnr /= static_cast<double>(test.size());
  rec.ssim /= static_cast<double>(test.size());
  return rec;
}

inline double mean_pair_psnr(const std::vector<ImagePair>& pairs, const MetricConfig& mcfg = {}) {
  double acc = 0.0;
  for (const auto& p : pairs) acc += psnr(p.degraded, p.clean, mcfg);
  return pairs.empty() ? 0.0 : acc / static_cast<double>(pairs.size());
}

struct RoundResult {
  int round = 0;
  NamedTensorStore<float> theta;  // trained weights for this round
  SparsityMask mask;
  EvalRecord eval;
  std::vector<EpochStat> trace;
};

struct LthResume {
  NamedTensorStore<float> theta0;
  NamedTensorStore<float> theta;
  SparsityMask mask;
  int round = 0;
};

struct LthCallbacks {
  std::function<void(int round, const MicroPromptNet&, const SparsityMask&)> on_round_start;
  const StepObserver* on_step = nullptr;
  std::function<void(const RoundResult&)> on_round_done;
};

struct LthOutcome {
  NamedTensorStore<float> theta0;
  std::vector<RoundResult> rounds;  // newly executed rounds only
};

// Full prune-and-rewind loop. Round 0 trains the dense net from theta0;
// round k >= 1 prunes the round-(k-1) weights, rewinds survivors to
// theta0, resets Adam and the schedule, retrains and evaluates. Stops once
// sparsity reaches the target or max_rounds rounds have run.
inline LthOutcome lth_run(const ModelConfig& mc, const PruneConfig& pc, const TrainConfig& tc,
                          const std::vector<ImagePair>& train_pairs, const std::vector<ImagePair>& val_pairs,
                          const std::vector<ImagePair>& test_pairs, const MetricConfig& mcfg = {},
                          const std::optional<LthResume>& resume = {}, const LthCallbacks& cb = {},
                          int stop_after_round = -1) {
  pc.validate();
  tc.validate();

  LthOutcome out;
  NamedTensorStore<float> trained;
  SparsityMask mask;
  int next_round = 0;

  if (resume) {
    out.theta0 = resume->theta0;
    trained = resume->theta;
    mask = resume->mask;
    next_round = resume->round + 1;
  } else {
    MicroPromptNet net = MicroPromptNet::init(mc, tc.seed);
    out.theta0 = net.params();
    mask = SparsityMask::ones_like(net.params());
  }

  auto run_round = [&](int round, MicroPromptNet& net) {
    if (cb.on_round_start) cb.on_round_start(round, net, mask);
    TrainOutcome t = train_epochs(net, train_pairs, val_pairs, mask, tc, round, cb.on_step);
    RoundResult r;
    r.round = round;
    r.theta = net.params();
    r.mask = mask;
    r.eval = evaluate(net, test_pairs, mask, mcfg, tc.clamp_eval, tc.threads);
    r.eval.epoch_of_best_validation = t.best_val_epoch;
    r.trace = std::move(t.trace);
    trained = r.theta;
    if (cb.on_round_done) cb.on_round_done(r);
    out.rounds.push_back(std::move(r));
  };

  if (next_round == 0) {
    MicroPromptNet net = MicroPromptNet::from_store(mc, out.theta0);
    run_round(0, net);
    next_round = 1;
    if (stop_after_round == 0) return out;
  }

  for (int round = next_round; round <= pc.max_rounds && sparsity(mask) < pc.target_sparsity; ++round) {
    PruneOutcome pruned = pc.scope == PruneConfig::Scope::Global
                              ? prune_step_global(trained, mask, pc.rate)
                              : prune_step_layerwise(trained, mask, pc.rate, pc.output_layer_factor);
    if (pruned.pruned == 0) break;  // floor rule made no progress
    mask = std::move(pruned.mask);
    MicroPromptNet net = MicroPromptNet::from_store(mc, rewind(out.theta0, mask));
    run_round(round, net);
    if (stop_after_round == round) break;
  }
  return out;
}

enum class OneshotKind { Magnitude, Random };

struct OneshotOutcome {
  SparsityMask mask;
  EvalRecord eval;
  std::vector<EpochStat> trace;
  int fine_tune_epochs = 0;
};

inline int fine_tune_epochs_for(int epochs) {
  return static_cast<int>(std::ceil(0.05 * static_cast<double>(epochs)));
}

// One-shot baseline: prune a trained dense net once (global magnitude or
// uniform random), then fine-tune for ceil(0.05 * epochs) epochs with
// gradient masking (no rewind). Fine-tuning anneals from lr_base without
// warmup.
inline OneshotOutcome oneshot_run(MicroPromptNet& net, OneshotKind kind, double fraction, const TrainConfig& tc,
                                  const std::vector<ImagePair>& train_pairs, const std::vector<ImagePair>& val_pairs,
                                  const std::vector<ImagePair>& test_pairs, const MetricConfig& mcfg = {}) {
  require(fraction > 0.0 && fraction < 1.0, "prune fraction must be in (0,1)");
  const SparsityMask ones = SparsityMask::ones_like(net.params());
  PruneOutcome pruned = kind == OneshotKind::Magnitude
                            ? prune_step_global(net.params(), ones, fraction)
                            : prune_step_random(ones, fraction, rng::mix({tc.seed, 0x6F736872ULL}));

  OneshotOutcome out;
  out.mask = std::move(pruned.mask);
  net = MicroPromptNet::from_store(net.config(), apply_mask(net.params(), out.mask));

  out.fine_tune_epochs = std::max(2, fine_tune_epochs_for(tc.epochs));
  TrainConfig ft = tc;
  ft.epochs = out.fine_tune_epochs;
  ft.warmup_epochs = 1;
  ft.lr_start = tc.lr_base;  // no warmup: start at the base rate, anneal down
  TrainOutcome t = train_epochs(net, train_pairs, val_pairs, out.mask, ft, /*round=*/0, nullptr);
  out.trace = std::move(t.trace);
  out.eval = evaluate(net, test_pairs, out.mask, mcfg, tc.clamp_eval, tc.threads);
  out.eval.epoch_of_best_validation = t.best_val_epoch;
  return out;
}

}  // namespace mirl
