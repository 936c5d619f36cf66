// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "retro/manifest.hpp"
#include "retro/tensor.hpp"

namespace retro {

// Ranked class predictions for one clip; index 0 is the top-1 class.
using Ranking = std::vector<ClassId>;

// Which predictions to read: the untouched clip, or the clip after a transform.
struct PredictionSource {
  std::optional<TransformId> transform;  // nullopt = original variant

  static PredictionSource original() { return {}; }
  static PredictionSource transformed(TransformId id) { return {id}; }
  friend bool operator==(const PredictionSource&, const PredictionSource&) = default;
};

std::string describe(const PredictionSource& source);

// Model outputs keyed by (video id, variant, transform).
class PredictionLog {
 public:
  // Throws kValidation on an empty ranking, duplicate class ids within a
  // ranking, or a key that is already present.
  void add(const std::string& video_id, PredictionSource source, Ranking ranking);

  const Ranking* find(std::string_view video_id, const PredictionSource& source) const;

  std::size_t size() const;
  // Shortest ranking in the log (0 if empty).
  std::size_t min_ranking_length() const { return min_length_; }

  // Every stored entry in a stable order: originals first, then each
  // transform in enum order; ids ascending within each group.
  struct EntryView {
    const std::string* video_id;
    PredictionSource source;
    const Ranking* ranking;
  };
  std::vector<EntryView> entries() const;

 private:
  using Table = std::unordered_map<std::string, Ranking>;
  Table& table(const PredictionSource& source);
  const Table* table(const PredictionSource& source) const;

  Table original_;
  std::map<TransformId, Table> transformed_;
  std::size_t min_length_ = 0;
};

// One entry per line:
//   {"video_id": "...", "variant": "original"|"transformed", "transform": null|"HF"|"TR"|"HFTR",
//    "ranking": [7, 2, 9, 1, 0]}
PredictionLog parse_prediction_log(std::istream& in, std::string_view source = "<stream>");
PredictionLog load_prediction_log(const std::filesystem::path& path);
void write_prediction_log(std::ostream& out, const PredictionLog& log);

}  // namespace retro
