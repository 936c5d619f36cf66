// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "retro/manifest.hpp"
#include "retro/prediction_log.hpp"
#include "retro/transform_map.hpp"

namespace retro {

struct DiscoveryConfig {
  double lambda = 0.9;  // minimum class recall for a class to be judged
  double alpha = 0.8;   // minimum affinity for invariant / equivariant

  // Throws kConfig unless both lie in [0, 1].
  void validate() const;
};

// Integer tallies behind recall and transfer proportions. Tallies from
// disjoint partitions of the manifest merge exactly; merged results must be
// bit-identical to a sequential pass.
//
// A video is evaluated when the log holds its original prediction; V_y is the
// evaluated videos of class y and the "correct" set is the subset whose
// original top-1 equals y.
struct DiscoveryCounts {
  TransformId transform = TransformId::kTR;
  std::vector<std::size_t> videos;   // |V_y|
  std::vector<std::size_t> correct;  // |correct subset of V_y|
  // Row y: top-1 class after the transform -> count, over the correct subset.
  std::vector<std::map<ClassId, std::size_t>> transfer;
  // Correct videos without a transformed prediction, sorted.
  std::vector<std::string> missing;

  std::size_t class_count() const { return videos.size(); }
  void merge(const DiscoveryCounts& other);
};

// Single pass over the manifest. `jobs` > 1 splits the records into
// contiguous chunks tallied on separate threads. Throws kValidation when a
// top-1 prediction names a class outside the manifest.
DiscoveryCounts count_predictions(const PredictionLog& log, const DatasetManifest& manifest, TransformId transform,
                                  unsigned jobs = 1);

// Fraction of evaluated class-y videos whose original top-1 is y.
// Throws kValidation for a class outside the manifest and kUndefinedMetric
// when the class has no evaluated videos.
double class_recall(const DiscoveryCounts& counts, ClassId y);
double class_recall(const PredictionLog& log, const DatasetManifest& manifest, ClassId y);

// Transfer proportions: row y holds, over the correctly classified videos of
// y, the fraction whose transformed top-1 is each class. Rows of classes
// with no correct videos are empty.
class TransferMatrix {
 public:
  TransferMatrix() = default;
  // Throws kIncompleteLog naming the videos when counts.missing is non-empty.
  explicit TransferMatrix(const DiscoveryCounts& counts);

  TransformId transform() const { return transform_; }
  std::size_t class_count() const { return rows_.size(); }
  double operator()(ClassId from, ClassId to) const;
  const std::map<ClassId, double>& row(ClassId from) const { return rows_.at(from); }

 private:
  TransformId transform_ = TransformId::kTR;
  std::vector<std::map<ClassId, double>> rows_;
};

TransferMatrix transfer_matrix(const PredictionLog& log, const DatasetManifest& manifest, TransformId transform,
                               unsigned jobs = 1);

// Omega(y, y') = Gamma(y, y') * Gamma(y', y). Zero for classes without a row.
double affinity(const TransferMatrix& gamma, ClassId y, ClassId y_prime);

struct ClassDiagnostics {
  ClassId class_id = 0;
  std::size_t videos = 0;
  std::size_t correct = 0;
  double recall = 0.0;
  bool established = false;
  double omega_self = 0.0;
  // Highest-affinity other class, lowest id on ties; nullopt when every
  // affinity with another class is zero.
  std::optional<ClassId> candidate;
  double omega_candidate = 0.0;
  std::map<ClassId, double> omega_row;  // non-zero affinities only
  bool conflict = false;  // demoted by the mutual-consistency pass
  ClassEntry entry;
};

struct DiscoveryReport {
  TransformId transform = TransformId::kTR;
  DiscoveryConfig config;
  std::vector<ClassDiagnostics> classes;
  ClassTransformMap map;
};

// Per class y with recall >= lambda:
//   invariant        if Omega(y, y) >= alpha
//   equivariant(y_t) if Omega(y, y_t) >= alpha, Omega(y, y) < alpha, Omega(y_t, y_t) < alpha
//   novel            otherwise.
// Classes below lambda are novel and flagged not established. Equivariant
// entries whose counterpart does not point back are demoted to novel,
// together with the counterpart, until the map is consistent.
DiscoveryReport extract_transform(const DiscoveryCounts& counts, const DiscoveryConfig& cfg);
DiscoveryReport extract_transform(const PredictionLog& log, const DatasetManifest& manifest, TransformId transform,
                                  const DiscoveryConfig& cfg, unsigned jobs = 1);

nlohmann::ordered_json to_json(const DiscoveryReport& report);

struct ScoreCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ScoreCounts&, const ScoreCounts&) = default;
};

// Mapping extraction scored as binary classification, per class:
//   TP  truth maps the class and discovery asserts the same mapping
//   FP  discovery asserts a mapping that truth does not have
//   FN  discovery says novel where truth maps the class
//   TN  both novel
// Throws kValidation when the two maps cover different classes.
ScoreCounts score_against_ground_truth(const ClassTransformMap& discovered, const ClassTransformMap& truth);

struct SweepPoint {
  double lambda = 0.0;
  double alpha = 0.0;
  ScoreCounts counts;
};

struct SweepResult {
  SweepPoint best;
  std::vector<SweepPoint> table;  // lambda-major, grid order
};

// Evaluates every (lambda, alpha) pair; the best point maximises TP, then
// TN, then prefers lower lambda, then lower alpha. Throws kConfig on an
// empty grid or out-of-range value.
SweepResult sweep(const DiscoveryCounts& counts, const ClassTransformMap& truth, std::span<const double> lambdas,
                  std::span<const double> alphas);

// "start:stop:step", inclusive of stop up to rounding; a bare number is a
// one-point grid. Throws kConfig.
std::vector<double> parse_grid(std::string_view range);

}  // namespace retro
