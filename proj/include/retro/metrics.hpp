// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "retro/manifest.hpp"
#include "retro/prediction_log.hpp"
#include "retro/transform_map.hpp"

namespace retro {

// Which examples are scored and against which label.
//
// An example is a manifest record (optionally of one split) with a
// prediction from `source`. With `label_map` set, its expected label is the
// image of its class under the map, and examples of classes without an image
// are excluded and counted separately.
struct EvalOptions {
  PredictionSource source;
  std::optional<Split> split;
  const ClassTransformMap* label_map = nullptr;
};

// Fraction of examples whose expected label is among the first k ranked
// classes. `filter` restricts by the example's true (untransformed) class.
// Throws kConfig when k is 0 or exceeds a scored ranking, kValidation when
// the filter names classes outside the manifest, kUndefinedMetric when no
// example survives filtering.
double topk_accuracy(const PredictionLog& log, const DatasetManifest& manifest, std::size_t k,
                     const std::optional<std::set<ClassId>>& filter = std::nullopt, const EvalOptions& opts = {});

// Rows are expected class, columns top-1 prediction, both in `order`.
struct ConfusionMatrix {
  std::vector<ClassId> order;
  std::vector<std::size_t> counts;  // row-major, order.size()^2
  std::size_t excluded = 0;         // examples without an expected label

  std::size_t size() const { return order.size(); }
  std::size_t at(std::size_t row, std::size_t col) const { return counts[row * order.size() + col]; }
  std::size_t row_sum(std::size_t row) const;
  std::size_t total() const;
  // Position of a class in `order`.
  std::size_t position(ClassId id) const;
  bool is_diagonal() const;
};

// Equivariant pairs first, adjacent, ordered by their smaller id; then every
// remaining class ascending. Without a map this is 0..n-1.
std::vector<ClassId> confusion_order(std::size_t class_count, const ClassTransformMap* map);

// `map` drives the ordering; `apply_label_transform` additionally maps each
// true label through it before tabulating. Throws kConfig when the flag is
// set without a map, kValidation for an invalid map.
ConfusionMatrix confusion(const PredictionLog& log, const DatasetManifest& manifest, const ClassTransformMap* map,
                          bool apply_label_transform, EvalOptions opts = {});

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm);
// Binary PGM heat map, one pixel per cell scaled by row-normalised mass.
void write_confusion_pgm(const std::filesystem::path& path, const ConfusionMatrix& cm, std::size_t cell_pixels = 8);

struct ClassGroup {
  std::string name;
  std::set<ClassId> classes;
};

// {"Zero-shot": [3, 7], "All": [...]}, file order preserved.
std::vector<ClassGroup> load_class_groups(const std::filesystem::path& path);

struct BreakdownRow {
  std::string name;
  std::size_t examples = 0;
  std::vector<std::optional<double>> accuracy;  // per k; nullopt when no examples
};

BreakdownRow breakdown_row(const PredictionLog& log, const DatasetManifest& manifest, const ClassGroup& group,
                           const std::vector<std::size_t>& ks, const EvalOptions& opts = {});
std::vector<BreakdownRow> breakdown(const PredictionLog& log, const DatasetManifest& manifest,
                                    const std::vector<ClassGroup>& groups, const std::vector<std::size_t>& ks,
                                    const EvalOptions& opts = {});

// group,n,top1,top5 with "n/a" for empty groups.
void write_breakdown_csv(std::ostream& out, const std::vector<BreakdownRow>& rows, const std::vector<std::size_t>& ks);

}  // namespace retro
