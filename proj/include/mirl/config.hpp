// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration and its JSON binding. The content digest over
// the canonical JSON (thread count excluded; it never changes numerics)
// stamps every checkpoint and run log so cross-run contamination is
// detectable.
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirl/checkpoint.hpp"
#include "mirl/data.hpp"
#include "mirl/model.hpp"
#include "mirl/pruning.hpp"
#include "mirl/train.hpp"

namespace mirl {

struct DataRecipe {
  std::string root = "data";
  std::vector<Task> tasks = {Task::Derain, Task::Dehaze, Task::Denoise};
  int image_size = 32;
  int train_per_task = 200;
  int test_per_task = 32;
  std::vector<double> noise_sigmas = {15.0, 25.0, 50.0};
  int rain_count = 12;
  double rain_length = 12.0;
  double rain_angle_deg = 70.0;
  double rain_intensity = 0.35;
  double haze_airlight_min = 0.7;
  double haze_airlight_max = 0.95;
  double haze_transmission_min = 0.3;
  double haze_transmission_max = 0.8;
  std::uint64_t seed = 7;

  void validate() const {
    require(!tasks.empty(), "data recipe needs at least one task");
    require(image_size >= 16 && image_size % 8 == 0, "image_size must be a multiple of 8, at least 16");
    require(train_per_task >= 1 && test_per_task >= 1, "per-task counts must be positive");
    require(!noise_sigmas.empty(), "need at least one noise sigma");
  }
};

struct ReportConfig {
  std::string run_dir = "runs/exp";
};

struct ExperimentConfig {
  ModelConfig model;
  PruneConfig prune;
  TrainConfig train;
  DataRecipe data;
  ReportConfig report;

  json to_json() const;
  static ExperimentConfig from_json(const json& j);
  std::string digest() const;
  void validate() const {
    model.validate();
    prune.validate();
    train.validate();
    data.validate();
  }
};

inline json to_json(const ModelConfig& m) {
  return json{{"base_dim", m.base_dim},       {"blocks_per_level", m.blocks_per_level},
              {"n_prompts", m.n_prompts},     {"prompt_levels", m.prompt_levels},
              {"prompt_spatial", m.prompt_spatial}, {"global_residual", m.global_residual}};
}

inline ModelConfig model_from_json(const json& j) {
  ModelConfig m;
  m.base_dim = j.value("base_dim", m.base_dim);
  m.blocks_per_level = j.value("blocks_per_level", m.blocks_per_level);
  m.n_prompts = j.value("n_prompts", m.n_prompts);
  m.prompt_levels = j.value("prompt_levels", m.prompt_levels);
  m.prompt_spatial = j.value("prompt_spatial", m.prompt_spatial);
  m.global_residual = j.value("global_residual", m.global_residual);
  return m;
}

inline json to_json(const PruneConfig& p) {
  return json{{"rate", p.rate},
              {"target_sparsity", p.target_sparsity},
              {"scope", p.scope == PruneConfig::Scope::Global ? "global" : "layerwise"},
              {"output_layer_factor", p.output_layer_factor},
              {"max_rounds", p.max_rounds}};
}

inline PruneConfig prune_from_json(const json& j) {
  PruneConfig p;
  p.rate = j.value("rate", p.rate);
  p.target_sparsity = j.value("target_sparsity", p.target_sparsity);
  const std::string scope = j.value("scope", std::string("global"));
  require(scope == "global" || scope == "layerwise", "prune scope must be 'global' or 'layerwise'");
  p.scope = scope == "global" ? PruneConfig::Scope::Global : PruneConfig::Scope::Layerwise;
  p.output_layer_factor = j.value("output_layer_factor", p.output_layer_factor);
  p.max_rounds = j.value("max_rounds", p.max_rounds);
  return p;
}

inline json to_json(const TrainConfig& t) {
  return json{{"epochs", t.epochs},           {"warmup_epochs", t.warmup_epochs},
              {"batch_size", t.batch_size},   {"lr_start", t.lr_start},
              {"lr_base", t.lr_base},         {"lr_min", t.lr_min},
              {"beta1", t.adam.beta1},        {"beta2", t.adam.beta2},
              {"adam_eps", t.adam.eps},       {"seed", t.seed},
              {"patch", t.patch},             {"clamp_eval", t.clamp_eval},
              {"augment", t.augment},         {"val_fraction", t.val_fraction},
              {"threads", t.threads}};
}

inline TrainConfig train_from_json(const json& j) {
  TrainConfig t;
  t.epochs = j.value("epochs", t.epochs);
  t.warmup_epochs = j.value("warmup_epochs", t.warmup_epochs);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.lr_start = j.value("lr_start", t.lr_start);
  t.lr_base = j.value("lr_base", t.lr_base);
  t.lr_min = j.value("lr_min", t.lr_min);
  t.adam.beta1 = j.value("beta1", t.adam.beta1);
  t.adam.beta2 = j.value("beta2", t.adam.beta2);
  t.adam.eps = j.value("adam_eps", t.adam.eps);
  t.seed = j.value("seed", t.seed);
  t.patch = j.value("patch", t.patch);
  t.clamp_eval = j.value("clamp_eval", t.clamp_eval);
  t.augment = j.value("augment", t.augment);
  t.val_fraction = j.value("val_fraction", t.val_fraction);
  t.threads = j.value("threads", t.threads);
  return t;
}

inline json to_json(const DataRecipe& d) {
  json tasks = json::array();
  for (Task t : d.tasks) tasks.push_back(task_name(t));
  return json{{"root", d.root},
              {"tasks", tasks},
              {"image_size", d.image_size},
              {"train_per_task", d.train_per_task},
              {"test_per_task", d.test_per_task},
              {"noise_sigmas", d.noise_sigmas},
              {"rain_count", d.rain_count},
              {"rain_length", d.rain_length},
              {"rain_angle_deg", d.rain_angle_deg},
              {"rain_intensity", d.rain_intensity},
              {"haze_airlight_min", d.haze_airlight_min},
              {"haze_airlight_max", d.haze_airlight_max},
              {"haze_transmission_min", d.haze_transmission_min},
              {"haze_transmission_max", d.haze_transmission_max},
              {"seed", d.seed}};
}

inline DataRecipe data_from_json(const json& j) {
  DataRecipe d;
  d.root = j.value("root", d.root);
  if (j.contains("tasks")) {
    d.tasks.clear();
    for (const auto& t : j.at("tasks")) d.tasks.push_back(task_from_name(t.get<std::string>()));
  }
  d.image_size = j.value("image_size", d.image_size);
  d.train_per_task = j.value("train_per_task", d.train_per_task);
  d.test_per_task = j.value("test_per_task", d.test_per_task);
  d.noise_sigmas = j.value("noise_sigmas", d.noise_sigmas);
  d.rain_count = j.value("rain_count", d.rain_count);
  d.rain_length = j.value("rain_length", d.rain_length);
  d.rain_angle_deg = j.value("rain_angle_deg", d.rain_angle_deg);
  d.rain_intensity = j.value("rain_intensity", d.rain_intensity);
  d.haze_airlight_min = j.value("haze_airlight_min", d.haze_airlight_min);
  d.haze_airlight_max = j.value("haze_airlight_max", d.haze_airlight_max);
  d.haze_transmission_min = j.value("haze_transmission_min", d.haze_transmission_min);
  d.haze_transmission_max = j.value("haze_transmission_max", d.haze_transmission_max);
  d.seed = j.value("seed", d.seed);
  return d;
}

inline json ExperimentConfig::to_json() const {
  return json{{"model", mirl::to_json(model)},
              {"prune", mirl::to_json(prune)},
              {"train", mirl::to_json(train)},
              {"data", mirl::to_json(data)},
              {"report", json{{"run_dir", report.run_dir}}}};
}

inline ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  if (j.contains("model")) c.model = model_from_json(j.at("model"));
  if (j.contains("prune")) c.prune = prune_from_json(j.at("prune"));
  if (j.contains("train")) c.train = train_from_json(j.at("train"));
  if (j.contains("data")) c.data = data_from_json(j.at("data"));
  if (j.contains("report")) c.report.run_dir = j.at("report").value("run_dir", c.report.run_dir);
  c.validate();
  return c;
}

inline std::string ExperimentConfig::digest() const {
  json j = to_json();
  j.at("train").erase("threads");  // worker count never changes numerics
  return digest_of_json(j);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config " + path.string());
  json j = json::parse(f);
  return ExperimentConfig::from_json(j);
}

}  // namespace mirl
