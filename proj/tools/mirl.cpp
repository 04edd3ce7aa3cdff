// SPDX-License-Identifier: Apache-2.0
//
// mirl: winning-ticket experiments for a desk-scale multi-task image
// restoration network. Subcommands: datagen, describe, train, lth,
// oneshot, eval, report. Errors leave as machine-readable JSON on stderr
// with a nonzero exit code.
#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "mirl/experiment.hpp"

namespace {

mirl::ExperimentConfig load(const std::string& config_path, std::optional<std::uint64_t> seed) {
  mirl::ExperimentConfig cfg = mirl::load_config(config_path);
  if (seed) cfg.train.seed = *seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"winning-ticket pruning laboratory for multi-task image restoration"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool force = false;
  bool override_digest = false;

  auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
    auto* opt = cmd->add_option("--config", config_path, "experiment config JSON");
    if (needs_config) opt->required();
    cmd->add_option("--seed", seed, "override train.seed from the config");
  };

  auto* datagen = app.add_subcommand("datagen", "materialise synthetic datasets and the manifest");
  add_common(datagen);
  datagen->add_flag("--force", force, "overwrite a non-empty output directory");

  auto* describe = app.add_subcommand("describe", "emit the architecture summary as JSON");
  add_common(describe);

  auto* train = app.add_subcommand("train", "train the dense network (no pruning rounds)");
  add_common(train);
  train->add_flag("--override-digest", override_digest, "proceed despite a config digest mismatch");

  auto* lth = app.add_subcommand("lth", "run the full iterative prune-and-rewind experiment");
  add_common(lth);
  lth->add_flag("--override-digest", override_digest, "proceed despite a config digest mismatch");
  int stop_after_round = -1;
  lth->add_option("--stop-after-round", stop_after_round, "stop after this round (for resumable runs)");

  auto* oneshot = app.add_subcommand("oneshot", "one-shot prune + fine-tune from a dense checkpoint");
  add_common(oneshot);
  std::string checkpoint_dir, out_dir = "oneshot_out", kind_str = "magnitude";
  double fraction = 0.3;
  oneshot->add_option("--checkpoint", checkpoint_dir, "trained dense checkpoint directory")->required();
  oneshot->add_option("--kind", kind_str, "magnitude | random")->check(CLI::IsMember({"magnitude", "random"}));
  oneshot->add_option("--fraction", fraction, "fraction of weights to remove");
  oneshot->add_option("--out", out_dir, "output directory");
  oneshot->add_flag("--override-digest", override_digest, "proceed despite a config digest mismatch");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the configured test sets");
  add_common(eval);
  std::string eval_checkpoint;
  eval->add_option("--checkpoint", eval_checkpoint, "checkpoint directory")->required();
  eval->add_flag("--override-digest", override_digest, "proceed despite a config digest mismatch");

  auto* report = app.add_subcommand("report", "write the per-round CSV/JSON tables for a run");
  std::string run_dir;
  report->add_option("--run-dir", run_dir, "run directory (defaults to the config's report.run_dir)");
  add_common(report, /*needs_config=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << '\n';
    return 2;
  }

  try {
    if (*datagen) {
      mirl::cmd_datagen(load(config_path, seed), force);
    } else if (*describe) {
      mirl::cmd_describe(load(config_path, seed));
    } else if (*train) {
      mirl::cmd_train(load(config_path, seed), override_digest);
    } else if (*lth) {
      mirl::cmd_lth(load(config_path, seed), override_digest, stop_after_round);
    } else if (*oneshot) {
      mirl::cmd_oneshot(load(config_path, seed), checkpoint_dir,
                        kind_str == "magnitude" ? mirl::OneshotKind::Magnitude : mirl::OneshotKind::Random, fraction,
                        out_dir, override_digest);
    } else if (*eval) {
      mirl::cmd_eval(load(config_path, seed), eval_checkpoint, override_digest);
    } else if (*report) {
      if (run_dir.empty()) {
        if (config_path.empty()) throw std::runtime_error("report needs --run-dir or --config");
        run_dir = load(config_path, seed).report.run_dir;
      }
      mirl::cmd_report(run_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
