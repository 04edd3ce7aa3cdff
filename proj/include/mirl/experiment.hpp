// SPDX-License-Identifier: Apache-2.0
//
// Command layer: dataset materialisation, run orchestration, checkpoint
// management and reporting. Run directories hold config.json, log.jsonl
// (one record per epoch), evals.jsonl (one record per round) and one
// checkpoint directory per round; every artifact embeds the config digest.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirl/checkpoint.hpp"
#include "mirl/config.hpp"
#include "mirl/data.hpp"
#include "mirl/model.hpp"
#include "mirl/train.hpp"

namespace mirl {

namespace fs = std::filesystem;

inline json to_json(const DegradationSpec& s) {
  switch (s.kind) {
    case DegradationSpec::Kind::Noise:
      return json{{"kind", "noise"}, {"noise_sigma", s.noise_sigma}, {"seed", s.seed}};
    case DegradationSpec::Kind::Rain:
      return json{{"kind", "rain"},           {"rain_count", s.rain_count},
                  {"rain_length", s.rain_length}, {"rain_angle_deg", s.rain_angle_deg},
                  {"rain_intensity", s.rain_intensity}, {"seed", s.seed}};
    default:
      return json{{"kind", "haze"},
                  {"haze_airlight", s.haze_airlight},
                  {"haze_transmission", s.haze_transmission},
                  {"seed", s.seed}};
  }
}

inline DegradationSpec spec_from_json(const json& j) {
  DegradationSpec s;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "noise") {
    s.kind = DegradationSpec::Kind::Noise;
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
  } else if (kind == "rain") {
    s.kind = DegradationSpec::Kind::Rain;
    s.rain_count = j.value("rain_count", s.rain_count);
    s.rain_length = j.value("rain_length", s.rain_length);
    s.rain_angle_deg = j.value("rain_angle_deg", s.rain_angle_deg);
    s.rain_intensity = j.value("rain_intensity", s.rain_intensity);
  } else if (kind == "haze") {
    s.kind = DegradationSpec::Kind::Haze;
    s.haze_airlight = j.value("haze_airlight", s.haze_airlight);
    s.haze_transmission = j.value("haze_transmission", s.haze_transmission);
  } else {
    throw std::invalid_argument("unknown degradation kind: " + kind);
  }
  s.seed = j.value("seed", s.seed);
  return s;
}

namespace detail {

inline void append_line(const fs::path& file, const json& j) {
  std::ofstream f(file, std::ios::app);
  if (!f) throw std::runtime_error("cannot append to " + file.string());
  f << j.dump() << '\n';
}

inline std::string zero_pad(int v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*d", width, v);
  return buf;
}

inline DegradationSpec make_spec(Task task, const DataRecipe& recipe, int index, std::uint64_t seed) {
  DegradationSpec spec;
  spec.seed = seed;
  switch (task) {
    case Task::Denoise:
      spec.kind = DegradationSpec::Kind::Noise;
      spec.noise_sigma = recipe.noise_sigmas[static_cast<std::size_t>(index) % recipe.noise_sigmas.size()];
      break;
    case Task::Derain:
      spec.kind = DegradationSpec::Kind::Rain;
      spec.rain_count = recipe.rain_count;
      spec.rain_length = recipe.rain_length;
      spec.rain_angle_deg = recipe.rain_angle_deg;
      spec.rain_intensity = recipe.rain_intensity;
      break;
    case Task::Dehaze: {
      spec.kind = DegradationSpec::Kind::Haze;
      rng::Engine eng(rng::mix({seed, 0x68617A65ULL}));
      spec.haze_airlight = eng.uniform(recipe.haze_airlight_min, recipe.haze_airlight_max);
      spec.haze_transmission = eng.uniform(recipe.haze_transmission_min, recipe.haze_transmission_max);
      break;
    }
  }
  return spec;
}

}  // namespace detail

// Generates per-task train/val/test PNG pairs plus a manifest covering the
// per-task splits and the balanced all-in-one training list.
inline void cmd_datagen(const ExperimentConfig& cfg, bool force, std::ostream& out = std::cout) {
  cfg.validate();
  const fs::path root = cfg.data.root;
  if (fs::exists(root) && !fs::is_empty(root)) {
    if (!force) throw std::runtime_error("output directory " + root.string() + " is not empty; pass --force to overwrite");
    fs::remove_all(root);
  }
  fs::create_directories(root);

  json entries = json::array();
  std::vector<Dataset> train_sets;

  for (std::size_t ti = 0; ti < cfg.data.tasks.size(); ++ti) {
    const Task task = cfg.data.tasks[ti];
    const std::string tname = task_name(task);
    for (const char* split : {"train", "val", "test"}) fs::create_directories(root / tname / split);

    const int pool = cfg.data.train_per_task;
    const int val_count = static_cast<int>(pool * cfg.train.val_fraction);
    std::vector<int> ids(static_cast<std::size_t>(pool));
    for (int i = 0; i < pool; ++i) ids[static_cast<std::size_t>(i)] = i;
    rng::Engine vsel(rng::mix({cfg.data.seed, 0x76616CULL, ti}));
    vsel.shuffle(ids.begin(), ids.end());
    std::set<int> val_ids(ids.begin(), ids.begin() + val_count);

    Dataset train_split;
    train_split.split = "train";
    auto cleans = gen_clean(pool, cfg.data.image_size, rng::mix({cfg.data.seed, 0x747261696EULL, ti}));
    for (int i = 0; i < pool; ++i) {
      const auto spec = detail::make_spec(task, cfg.data, i, rng::mix({cfg.data.seed, 0x73706563ULL, ti, static_cast<std::uint64_t>(i)}));
      ImagePair pair = degrade(cleans[static_cast<std::size_t>(i)], spec);
      pair.source = "procedural/" + tname + "/" + std::to_string(i);
      pair.aug_seed = rng::mix({cfg.data.seed, 0x617567ULL, ti, static_cast<std::uint64_t>(i)});
      const std::string split = val_ids.count(i) ? "val" : "train";
      const fs::path base = root / tname / split / detail::zero_pad(i, 4);
      save_image_png(base.string() + "_clean.png", pair.clean);
      save_image_png(base.string() + "_degraded.png", pair.degraded);
      entries.push_back(json{{"id", i},
                             {"task", tname},
                             {"split", split},
                             {"source", pair.source},
                             {"clean", tname + "/" + split + "/" + detail::zero_pad(i, 4) + "_clean.png"},
                             {"degraded", tname + "/" + split + "/" + detail::zero_pad(i, 4) + "_degraded.png"},
                             {"spec", to_json(spec)},
                             {"seed", spec.seed},
                             {"aug_seed", pair.aug_seed}});
      if (split == "train") train_split.pairs.push_back(std::move(pair));
    }
    train_sets.push_back(std::move(train_split));

    auto test_cleans = gen_clean(cfg.data.test_per_task, cfg.data.image_size, rng::mix({cfg.data.seed, 0x74657374ULL, ti}));
    for (int i = 0; i < cfg.data.test_per_task; ++i) {
      const auto spec = detail::make_spec(task, cfg.data, i, rng::mix({cfg.data.seed, 0x7473706BULL, ti, static_cast<std::uint64_t>(i)}));
      ImagePair pair = degrade(test_cleans[static_cast<std::size_t>(i)], spec);
      const fs::path base = root / tname / "test" / detail::zero_pad(i, 4);
      save_image_png(base.string() + "_clean.png", pair.clean);
      save_image_png(base.string() + "_degraded.png", pair.degraded);
      entries.push_back(json{{"id", i},
                             {"task", tname},
                             {"split", "test"},
                             {"source", "procedural/" + tname + "/test/" + std::to_string(i)},
                             {"clean", tname + "/test/" + detail::zero_pad(i, 4) + "_clean.png"},
                             {"degraded", tname + "/test/" + detail::zero_pad(i, 4) + "_degraded.png"},
                             {"spec", to_json(spec)},
                             {"seed", spec.seed},
                             {"aug_seed", 0}});
    }
  }

  // balanced all-in-one training list (equal per-task contributions)
  Dataset combined = balance_duplicate(train_sets, rng::mix({cfg.data.seed, 0x62616C616EULL}));
  json combined_train = json::array();
  for (const auto& p : combined.pairs) {
    const auto slash = p.source.rfind('/');
    combined_train.push_back(json{{"task", task_name(p.task)},
                                  {"id", std::stoi(p.source.substr(slash + 1))},
                                  {"aug_seed", p.aug_seed}});
  }

  json manifest{{"version", 1},
                {"config_digest", cfg.digest()},
                {"recipe", to_json(cfg.data)},
                {"entries", entries},
                {"combined_train", combined_train}};
  std::ofstream mf(root / "manifest.json");
  mf << manifest.dump(2) << '\n';
  out << json{{"written", root.string()}, {"pairs", entries.size()}}.dump() << '\n';
}

struct RunData {
  std::vector<ImagePair> train;  // balanced all-in-one training list
  std::vector<ImagePair> val;
  std::vector<ImagePair> test_all;
  std::vector<std::pair<Task, std::vector<ImagePair>>> test_per_task;
};

inline RunData load_run_data(const ExperimentConfig& cfg) {
  const fs::path root = cfg.data.root;
  const fs::path mpath = root / "manifest.json";
  if (!fs::exists(mpath)) throw std::runtime_error("no manifest at " + mpath.string() + "; run datagen first");
  std::ifstream mf(mpath);
  const json manifest = json::parse(mf);

  std::map<std::pair<std::string, int>, ImagePair> train_pool;
  RunData data;
  for (const auto& e : manifest.at("entries")) {
    const std::string split = e.at("split").get<std::string>();
    const std::string tname = e.at("task").get<std::string>();
    ImagePair pair;
    pair.task = task_from_name(tname);
    pair.clean = load_image_png(root / e.at("clean").get<std::string>());
    pair.degraded = load_image_png(root / e.at("degraded").get<std::string>());
    pair.spec = spec_from_json(e.at("spec"));
    pair.source = e.at("source").get<std::string>();
    pair.aug_seed = e.at("aug_seed").get<std::uint64_t>();
    if (split == "train") {
      train_pool[{tname, e.at("id").get<int>()}] = pair;
    } else if (split == "val") {
      data.val.push_back(std::move(pair));
    } else {
      data.test_all.push_back(pair);
      auto it = std::find_if(data.test_per_task.begin(), data.test_per_task.end(),
                             [&](const auto& kv) { return kv.first == pair.task; });
      if (it == data.test_per_task.end()) {
        data.test_per_task.emplace_back(pair.task, std::vector<ImagePair>{});
        it = std::prev(data.test_per_task.end());
      }
      it->second.push_back(std::move(pair));
    }
  }
  for (const auto& c : manifest.at("combined_train")) {
    const auto key = std::make_pair(c.at("task").get<std::string>(), c.at("id").get<int>());
    auto it = train_pool.find(key);
    require(it != train_pool.end(), "combined_train references missing pair " + key.first + "/" + std::to_string(key.second));
    ImagePair pair = it->second;
    pair.aug_seed = c.at("aug_seed").get<std::uint64_t>();
    data.train.push_back(std::move(pair));
  }
  return data;
}

namespace detail {

inline fs::path round_dir(const fs::path& run_dir, int round) { return run_dir / ("round_" + zero_pad(round, 4)); }

inline json seeds_json(const ExperimentConfig& cfg) {
  return json{{"train", cfg.train.seed}, {"data", cfg.data.seed}};
}

inline void write_round_artifacts(const fs::path& run_dir, const ExperimentConfig& cfg, const std::string& digest,
                                  const NamedTensorStore<float>& theta0, const RoundResult& r, const RunData& data) {
  CheckpointData ckpt;
  ckpt.config_digest = digest;
  ckpt.round = r.round;
  ckpt.seeds = seeds_json(cfg);
  ckpt.theta0 = theta0;
  ckpt.theta = r.theta;
  ckpt.mask = r.mask;
  save_checkpoint(round_dir(run_dir, r.round), ckpt);

  const double spars = sparsity(r.mask);
  for (const auto& e : r.trace)
    append_line(run_dir / "log.jsonl", json{{"round", e.round},
                                            {"epoch", e.epoch},
                                            {"loss", e.train_loss},
                                            {"val_psnr", e.val_psnr},
                                            {"surviving_params", r.mask.survivors()},
                                            {"sparsity", spars},
                                            {"lr", e.lr}});

  MicroPromptNet net = MicroPromptNet::from_store(cfg.model, r.theta);
  json per_task = json::object();
  for (const auto& [task, pairs] : data.test_per_task) {
    EvalRecord rec = evaluate(net, pairs, r.mask, {}, cfg.train.clamp_eval, cfg.train.threads);
    per_task[task_name(task)] = json{{"psnr", rec.psnr}, {"ssim", rec.ssim}};
  }
  const std::size_t total = r.theta.total_params();
  const std::size_t prunable = r.theta.prunable_params();
  const std::size_t surv_total = total - (prunable - r.mask.survivors());
  append_line(run_dir / "evals.jsonl",
              json{{"round", r.round},
                   {"psnr", r.eval.psnr},
                   {"ssim", r.eval.ssim},
                   {"epoch_of_best_validation", r.eval.epoch_of_best_validation},
                   {"params_surviving", r.eval.params_surviving},
                   {"sparsity", spars},
                   {"sparsity_total", 1.0 - static_cast<double>(surv_total) / static_cast<double>(total)},
                   {"compression_prunable", compression_rate(static_cast<double>(prunable), static_cast<double>(r.mask.survivors()))},
                   {"compression_total", compression_rate(static_cast<double>(total), static_cast<double>(surv_total))},
                   {"per_task", per_task}});
}

inline std::optional<LthResume> find_resume_state(const fs::path& run_dir, const std::string& digest, bool override_digest) {
  int last = -1;
  while (fs::exists(round_dir(run_dir, last + 1) / "meta.json")) ++last;
  if (last < 0) return std::nullopt;
  CheckpointData ckpt = load_checkpoint(round_dir(run_dir, last));
  if (ckpt.config_digest != digest && !override_digest)
    throw std::runtime_error("checkpoint digest " + ckpt.config_digest + " does not match config digest " + digest +
                             " (use --override-digest to force)");
  LthResume resume;
  resume.theta0 = std::move(ckpt.theta0);
  resume.theta = std::move(ckpt.theta);
  resume.mask = std::move(ckpt.mask);
  resume.round = ckpt.round;
  return resume;
}

}  // namespace detail

// Full iterative prune-and-rewind experiment. Resumes from the newest
// checkpoint in the run directory when one exists.
inline void cmd_lth(const ExperimentConfig& cfg, bool override_digest = false, int stop_after_round = -1,
                    std::ostream& out = std::cout) {
  cfg.validate();
  const std::string digest = cfg.digest();
  const fs::path run_dir = cfg.report.run_dir;
  fs::create_directories(run_dir);

  const fs::path config_path = run_dir / "config.json";
  if (fs::exists(config_path)) {
    std::ifstream f(config_path);
    const json prior = json::parse(f);
    if (prior.at("config_digest").get<std::string>() != digest && !override_digest)
      throw std::runtime_error("run directory " + run_dir.string() + " belongs to config digest " +
                               prior.at("config_digest").get<std::string>() + ", not " + digest +
                               " (use --override-digest to force)");
  } else {
    std::ofstream f(config_path);
    f << json{{"config_digest", digest}, {"config", cfg.to_json()}}.dump(2) << '\n';
  }
  if (!fs::exists(run_dir / "log.jsonl"))
    detail::append_line(run_dir / "log.jsonl", json{{"config_digest", digest}, {"version", 1}});

  const RunData data = load_run_data(cfg);
  const std::optional<LthResume> resume = detail::find_resume_state(run_dir, digest, override_digest);

  // artifacts stream per round; capture theta0 on round start
  LthCallbacks cb;
  NamedTensorStore<float> theta0;
  if (resume) theta0 = resume->theta0;
  cb.on_round_start = [&](int round, const MicroPromptNet& net, const SparsityMask& mask) {
    if (round == 0) theta0 = net.params();
    (void)mask;
  };
  cb.on_round_done = [&](const RoundResult& r) {
    detail::write_round_artifacts(run_dir, cfg, digest, theta0, r, data);
    out << json{{"round", r.round},
                {"psnr", r.eval.psnr},
                {"ssim", r.eval.ssim},
                {"surviving_params", r.eval.params_surviving},
                {"sparsity", sparsity(r.mask)}}.dump()
        << '\n';
  };

  lth_run(cfg.model, cfg.prune, cfg.train, data.train, data.val, data.test_all, {}, resume, cb, stop_after_round);
}

// Dense-only training: the degenerate loop with zero pruning rounds.
inline void cmd_train(const ExperimentConfig& cfg, bool override_digest = false, std::ostream& out = std::cout) {
  ExperimentConfig dense = cfg;
  dense.prune.max_rounds = 0;
  cmd_lth(dense, override_digest, -1, out);
}

// One-shot pruning baseline from a trained dense checkpoint.
inline void cmd_oneshot(const ExperimentConfig& cfg, const fs::path& checkpoint_dir, OneshotKind kind,
                        double fraction, const fs::path& out_dir, bool override_digest = false,
                        std::ostream& out = std::cout) {
  cfg.validate();
  if (!fs::exists(checkpoint_dir / "meta.json"))
    throw std::runtime_error("no dense checkpoint at " + checkpoint_dir.string() + "; run train or lth first");
  CheckpointData ckpt = load_checkpoint(checkpoint_dir);
  const std::string digest = cfg.digest();
  if (ckpt.config_digest != digest && !override_digest)
    throw std::runtime_error("checkpoint digest " + ckpt.config_digest + " does not match config digest " + digest +
                             " (use --override-digest to force)");

  const RunData data = load_run_data(cfg);
  MicroPromptNet net = MicroPromptNet::from_store(cfg.model, ckpt.theta);
  OneshotOutcome res = oneshot_run(net, kind, fraction, cfg.train, data.train, data.val, data.test_all);

  fs::create_directories(out_dir);
  CheckpointData pruned;
  pruned.config_digest = digest;
  pruned.round = ckpt.round;
  pruned.seeds = detail::seeds_json(cfg);
  pruned.theta0 = std::move(ckpt.theta0);
  pruned.theta = net.params();
  pruned.mask = res.mask;
  save_checkpoint(out_dir / "checkpoint", pruned);

  const std::size_t total = net.params().total_params();
  const std::size_t prunable = net.params().prunable_params();
  const json eval{{"kind", kind == OneshotKind::Magnitude ? "magnitude" : "random"},
                  {"fraction", fraction},
                  {"fine_tune_epochs", res.fine_tune_epochs},
                  {"psnr", res.eval.psnr},
                  {"ssim", res.eval.ssim},
                  {"epoch_of_best_validation", res.eval.epoch_of_best_validation},
                  {"params_surviving", res.eval.params_surviving},
                  {"sparsity", sparsity(res.mask)},
                  {"compression_prunable", compression_rate(static_cast<double>(prunable), static_cast<double>(res.mask.survivors()))},
                  {"config_digest", digest}};
  std::ofstream f(out_dir / "eval.json");
  f << eval.dump(2) << '\n';
  out << eval.dump() << '\n';
}

// Metrics for an existing checkpoint against the configured datasets.
inline json cmd_eval(const ExperimentConfig& cfg, const fs::path& checkpoint_dir, bool override_digest = false,
                     std::ostream& out = std::cout) {
  cfg.validate();
  CheckpointData ckpt = load_checkpoint(checkpoint_dir);
  const std::string digest = cfg.digest();
  if (ckpt.config_digest != digest && !override_digest)
    throw std::runtime_error("checkpoint digest " + ckpt.config_digest + " does not match config digest " + digest +
                             " (use --override-digest to force)");

  const RunData data = load_run_data(cfg);
  MicroPromptNet net = MicroPromptNet::from_store(cfg.model, ckpt.theta);

  json per_task = json::object();
  for (const auto& [task, pairs] : data.test_per_task) {
    EvalRecord rec = evaluate(net, pairs, ckpt.mask, {}, cfg.train.clamp_eval, cfg.train.threads);
    per_task[task_name(task)] = json{{"psnr", rec.psnr}, {"ssim", rec.ssim}};
  }
  EvalRecord agg = evaluate(net, data.test_all, ckpt.mask, {}, cfg.train.clamp_eval, cfg.train.threads);

  const std::size_t total = net.params().total_params();
  const std::size_t prunable = net.params().prunable_params();
  const std::size_t surv_total = total - (prunable - ckpt.mask.survivors());
  json result{{"config_digest", digest},
              {"round", ckpt.round},
              {"per_task", per_task},
              {"aggregate", json{{"psnr", agg.psnr}, {"ssim", agg.ssim}}},
              {"params",
               json{{"total", total},
                    {"prunable", prunable},
                    {"surviving_prunable", ckpt.mask.survivors()},
                    {"surviving_total", surv_total},
                    {"sparsity_prunable", sparsity(ckpt.mask)},
                    {"sparsity_total", 1.0 - static_cast<double>(surv_total) / static_cast<double>(total)},
                    {"compression_prunable", format_compression(compression_rate(static_cast<double>(prunable), static_cast<double>(ckpt.mask.survivors())))},
                    {"compression_total", format_compression(compression_rate(static_cast<double>(total), static_cast<double>(surv_total)))}}}};
  out << result.dump(2) << '\n';
  return result;
}

// Round-by-round table (CSV + JSON twin) of quality versus parameter count.
inline json cmd_report(const fs::path& run_dir, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  const fs::path evals_path = run_dir / "evals.jsonl";
  if (!fs::exists(evals_path)) throw std::runtime_error("no evals.jsonl under " + run_dir.string());

  std::string digest;
  {
    const fs::path config_path = run_dir / "config.json";
    if (fs::exists(config_path)) {
      std::ifstream f(config_path);
      digest = json::parse(f).at("config_digest").get<std::string>();
    }
  }

  std::vector<json> rounds;
  std::ifstream f(evals_path);
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    rounds.push_back(json::parse(line));
  }
  std::sort(rounds.begin(), rounds.end(), [](const json& a, const json& b) { return a.at("round") < b.at("round"); });

  json rows = json::array();
  for (const auto& r : rounds) {
    for (auto it = r.at("per_task").begin(); it != r.at("per_task").end(); ++it)
      rows.push_back(json{{"round", r.at("round")},
                          {"task", it.key()},
                          {"surviving_params", r.at("params_surviving")},
                          {"sparsity", r.at("sparsity")},
                          {"psnr", it.value().at("psnr")},
                          {"ssim", it.value().at("ssim")}});
    rows.push_back(json{{"round", r.at("round")},
                        {"task", "all"},
                        {"surviving_params", r.at("params_surviving")},
                        {"sparsity", r.at("sparsity")},
                        {"psnr", r.at("psnr")},
                        {"ssim", r.at("ssim")}});
  }

  json report{{"config_digest", digest}, {"rows", rows}};
  {
    std::ofstream jf(run_dir / "report.json");
    jf << report.dump(2) << '\n';
    std::ofstream cf(run_dir / "report.csv");
    cf << "round,task,surviving_params,sparsity,psnr,ssim\n";
    char buf[256];
    for (const auto& row : rows) {
      std::snprintf(buf, sizeof buf, "%d,%s,%zu,%.17g,%.17g,%.17g\n", row.at("round").get<int>(),
                    row.at("task").get<std::string>().c_str(), row.at("surviving_params").get<std::size_t>(),
                    row.at("sparsity").get<double>(), row.at("psnr").get<double>(), row.at("ssim").get<double>());
      cf << buf;
    }
  }

  // flag obviously incomplete runs (no dense round or gaps in the sequence)
  bool complete = !rounds.empty() && rounds.front().at("round").get<int>() == 0;
  for (std::size_t i = 1; i < rounds.size() && complete; ++i)
    if (rounds[i].at("round").get<int>() != static_cast<int>(i)) complete = false;
  if (!complete) err << json{{"warning", "run appears incomplete; report covers the rounds present"}}.dump() << '\n';

  out << report.dump() << '\n';
  return report;
}

// Architecture summary: one record per parameter tensor.
inline json cmd_describe(const ExperimentConfig& cfg, std::ostream& out = std::cout) {
  cfg.model.validate();
  json layers = json::array();
  std::size_t total = 0, prunable = 0;
  for (const ParamSpec& spec : plan_params(cfg.model)) {
    const std::size_t n = numel(spec.shape);
    total += n;
    if (spec.prunable) prunable += n;
    layers.push_back(json{{"name", spec.name},
                          {"shape", spec.shape},
                          {"params", n},
                          {"prunable", spec.prunable},
                          {"output_layer", spec.output_layer}});
  }
  const auto dims = cfg.model.level_dims();
  json result{{"config_digest", cfg.digest()},
              {"level_dims", std::vector<int>(dims.begin(), dims.end())},
              {"total_params", total},
              {"prunable_params", prunable},
              {"layers", layers}};
  out << result.dump(2) << '\n';
  return result;
}

}  // namespace mirl
