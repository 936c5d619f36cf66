// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "retro/error.hpp"

namespace {

using namespace retro::cli;

// Logs go to stderr; stdout carries command output only.
void configure_logging() {
  auto logger = spdlog::stderr_color_mt("retro");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("RETRO_LOG")) {
    const auto parsed = spdlog::level::from_str(level);
    // from_str maps unknown names to off; only honour explicit "off".
    if (parsed != spdlog::level::off || std::string(level) == "off") spdlog::set_level(parsed);
  }
}

void add_manifest(CLI::App* cmd, ManifestArgs& args) {
  cmd->add_option("--manifest", args.manifest, "Dataset manifest (JSONL)")->required();
  cmd->add_option("--classes", args.classes, "Class-name list (JSON array); defaults to <manifest>.classes.json");
}

void add_jobs(CLI::App* cmd, unsigned& jobs) {
  cmd->add_option("--jobs,-j", jobs, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Label-altering video transforms and their class maps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "retro 1.0.0");

  TransformArgs transform;
  auto* transform_cmd = app.add_subcommand("transform", "Apply a transform to every .rten file in a directory");
  transform_cmd->add_option("--op", transform.op, "tr, hf or hftr")->required();
  transform_cmd->add_option("--in", transform.in_dir, "Input directory")->required();
  transform_cmd->add_option("--out", transform.out_dir, "Output directory")->required();
  transform_cmd->add_option("--layout", transform.layout, "Output layout: tchw or cthw");
  transform_cmd->add_option("--summary", transform.summary, "Also write the JSON summary here");
  add_jobs(transform_cmd, transform.jobs);

  DiscoverArgs discover;
  auto* discover_cmd = app.add_subcommand("discover", "Extract a class transform map from a prediction log");
  add_manifest(discover_cmd, discover.manifest);
  discover_cmd->add_option("--pred", discover.predictions, "Prediction log (JSONL)")->required();
  discover_cmd->add_option("--transform", discover.transform, "TR, HF or HFTR")->required();
  discover_cmd->add_option("--lambda", discover.lambda, "Recall threshold")->capture_default_str();
  discover_cmd->add_option("--alpha", discover.alpha, "Affinity threshold")->capture_default_str();
  discover_cmd->add_option("--out", discover.out, "Report (JSON)")->required();
  add_jobs(discover_cmd, discover.jobs);

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid-search lambda and alpha against a ground-truth map");
  add_manifest(sweep_cmd, sweep.manifest);
  sweep_cmd->add_option("--pred", sweep.predictions, "Prediction log (JSONL)")->required();
  sweep_cmd->add_option("--transform", sweep.transform, "TR, HF or HFTR")->required();
  sweep_cmd->add_option("--truth", sweep.truth, "Ground-truth map (JSON)")->required();
  sweep_cmd->add_option("--lambda-grid", sweep.lambda_grid, "start:stop:step, inclusive")->required();
  sweep_cmd->add_option("--alpha-grid", sweep.alpha_grid, "start:stop:step, inclusive")->required();
  sweep_cmd->add_option("--out", sweep.out, "Best point and its report (JSON)")->required();
  sweep_cmd->add_option("--table", sweep.table, "Full grid (CSV)");
  add_jobs(sweep_cmd, sweep.jobs);

  auto* synth_cmd = app.add_subcommand("synth", "Build synthetic training manifests");
  synth_cmd->require_subcommand(1);

  AugmentArgs augment;
  auto* augment_cmd = synth_cmd->add_subcommand("augment", "One transformed copy per mapped training video");
  add_manifest(augment_cmd, augment.manifest);
  augment_cmd->add_option("--map", augment.map, "Class transform map (JSON)")->required();
  augment_cmd->add_option("--out", augment.out, "Synthetic manifest (JSONL)")->required();

  ZeroShotArgs zeroshot;
  auto* zeroshot_cmd = synth_cmd->add_subcommand("zeroshot", "Replace one class of each equivariant pair by synthesis");
  add_manifest(zeroshot_cmd, zeroshot.manifest);
  zeroshot_cmd->add_option("--map", zeroshot.map, "Class transform map (JSON)")->required();
  zeroshot_cmd->add_option("--transform", zeroshot.transform, "Must match the map; defaults to the map's");
  zeroshot_cmd->add_option("--out", zeroshot.out_dir, "Output directory")->required();

  SampleArgs sample;
  auto* sample_cmd = synth_cmd->add_subcommand("sample", "Draw one seeded online-augmentation epoch");
  add_manifest(sample_cmd, sample.manifest);
  sample_cmd->add_option("--map", sample.maps, "Class transform map per transform, applied in order")->required();
  sample_cmd->add_option("--p", sample.p, "Per-transform probability")->capture_default_str()->check(
      CLI::Range(0.0, 1.0));
  sample_cmd->add_option("--seed", sample.seed, "Generator seed")->capture_default_str();
  sample_cmd->add_option("--split", sample.split, "train, val or test")->capture_default_str();
  sample_cmd->add_option("--out", sample.out, "Sampled epoch (JSONL)")->required();

  MaterializeArgs materialize;
  auto* materialize_cmd = synth_cmd->add_subcommand("materialize", "Write the tensors of a synthetic manifest");
  materialize_cmd->add_option("--synthetic", materialize.synthetic, "Synthetic manifest (JSONL)")->required();
  materialize_cmd->add_option("--src", materialize.src_dir, "Directory of <video_id>.rten sources")->required();
  materialize_cmd->add_option("--out", materialize.out_dir, "Output directory")->required();
  materialize_cmd->add_option("--summary", materialize.summary, "Also write the JSON summary here");
  add_jobs(materialize_cmd, materialize.jobs);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Top-k breakdown and confusion matrices");
  add_manifest(eval_cmd, eval.manifest);
  eval_cmd->add_option("--pred", eval.predictions, "Prediction log (JSONL)")->required();
  eval_cmd->add_option("--variant", eval.variant, "original or transformed")->capture_default_str();
  eval_cmd->add_option("--transform", eval.transform, "Transform of the scored predictions");
  eval_cmd->add_option("--split", eval.split, "Restrict to train, val or test");
  eval_cmd->add_option("--map", eval.map, "Class transform map; orders the confusion matrix");
  eval_cmd->add_flag("--apply-lt", eval.apply_lt, "Score against labels mapped through --map");
  eval_cmd->add_option("--groups", eval.groups, "Named class groups (JSON)");
  eval_cmd->add_option("--topk", eval.topk, "Comma-separated k values")->capture_default_str();
  eval_cmd->add_option("--confusion", eval.confusion_csv, "Confusion matrix (CSV)");
  eval_cmd->add_option("--heatmap", eval.heatmap, "Confusion heat map (PGM)");
  eval_cmd->add_option("--out", eval.out, "Breakdown (CSV); stdout by default");

  PerceptionArgs perception;
  auto* perception_cmd = app.add_subcommand("perception", "Reversibility verdicts from forced-choice tallies");
  perception_cmd->add_option("--tally", perception.tally, "class_id,n_trials,forward_choices (CSV)");
  perception_cmd->add_option("--qc", perception.qc, "Raw submissions (JSONL) to filter and tally");
  perception_cmd->add_option("--k", perception.k, "Catch trials per submission");
  perception_cmd->add_option("--min-correct", perception.min_correct, "Catch trials a worker must pass");
  perception_cmd->add_option("--out", perception.out, "Report (CSV); stdout by default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : retro::exit_code(retro::ErrorKind::kConfig);
  }

  try {
    if (*transform_cmd) return run_transform(transform);
    if (*discover_cmd) return run_discover(discover);
    if (*sweep_cmd) return run_sweep(sweep);
    if (*augment_cmd) return run_augment(augment);
    if (*zeroshot_cmd) return run_zeroshot(zeroshot);
    if (*sample_cmd) return run_sample(sample);
    if (*materialize_cmd) return run_materialize(materialize);
    if (*eval_cmd) return run_eval(eval);
    if (*perception_cmd) return run_perception(perception);
  } catch (const retro::Error& e) {
    spdlog::error("{}: {}", retro::to_string(e.kind()), e.what());
    return retro::exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("io: {}", e.what());
    return retro::exit_code(retro::ErrorKind::kIo);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}
