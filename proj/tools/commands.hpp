// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace retro::cli {

namespace fs = std::filesystem;

inline constexpr std::uint64_t kDefaultSeed = 2019;

struct ManifestArgs {
  fs::path manifest;
  std::optional<fs::path> classes;
};

struct TransformArgs {
  std::string op;
  fs::path in_dir;
  fs::path out_dir;
  std::optional<std::string> layout;
  std::optional<fs::path> summary;
  unsigned jobs = 1;
};

struct DiscoverArgs {
  ManifestArgs manifest;
  fs::path predictions;
  std::string transform;
  double lambda = 0.9;
  double alpha = 0.8;
  fs::path out;
  unsigned jobs = 1;
};

struct SweepArgs {
  ManifestArgs manifest;
  fs::path predictions;
  std::string transform;
  fs::path truth;
  std::string lambda_grid;
  std::string alpha_grid;
  fs::path out;
  std::optional<fs::path> table;
  unsigned jobs = 1;
};

struct AugmentArgs {
  ManifestArgs manifest;
  fs::path map;
  fs::path out;
};

struct ZeroShotArgs {
  ManifestArgs manifest;
  fs::path map;
  std::optional<std::string> transform;
  fs::path out_dir;
};

struct SampleArgs {
  ManifestArgs manifest;
  std::vector<fs::path> maps;
  double p = 0.5;
  std::uint64_t seed = kDefaultSeed;
  std::string split = "train";
  fs::path out;
};

struct MaterializeArgs {
  fs::path synthetic;
  fs::path src_dir;
  fs::path out_dir;
  std::optional<fs::path> summary;
  unsigned jobs = 1;
};

struct EvalArgs {
  ManifestArgs manifest;
  fs::path predictions;
  std::string variant = "original";
  std::optional<std::string> transform;
  std::optional<std::string> split;
  std::optional<fs::path> map;
  bool apply_lt = false;
  std::optional<fs::path> groups;
  std::string topk = "1,5";
  std::optional<fs::path> confusion_csv;
  std::optional<fs::path> heatmap;
  std::optional<fs::path> out;
};

struct PerceptionArgs {
  std::optional<fs::path> tally;
  std::optional<fs::path> qc;
  std::optional<std::size_t> k;
  std::optional<std::size_t> min_correct;
  std::optional<fs::path> out;
};

// Each returns the process exit status and throws retro::Error on failure.
int run_transform(const TransformArgs& args);
int run_discover(const DiscoverArgs& args);
int run_sweep(const SweepArgs& args);
int run_augment(const AugmentArgs& args);
int run_zeroshot(const ZeroShotArgs& args);
int run_sample(const SampleArgs& args);
int run_materialize(const MaterializeArgs& args);
int run_eval(const EvalArgs& args);
int run_perception(const PerceptionArgs& args);

}  // namespace retro::cli
