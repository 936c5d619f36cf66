// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace retro {

using ClassId = std::uint32_t;

enum class Split : std::uint8_t { kTrain, kVal, kTest };

std::string_view to_string(Split split);
std::optional<Split> try_parse_split(std::string_view text);

struct VideoRecord {
  std::string video_id;
  ClassId class_id = 0;
  Split split = Split::kTrain;

  friend bool operator==(const VideoRecord&, const VideoRecord&) = default;
};

// Videos with their labels and the class-name table. Class ids are dense:
// the class universe is [0, class_count()).
class DatasetManifest {
 public:
  DatasetManifest() = default;
  // Throws kValidation on duplicate video ids or class ids without a name.
  DatasetManifest(std::vector<VideoRecord> records, std::vector<std::string> class_names);

  const std::vector<VideoRecord>& records() const { return records_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  std::size_t class_count() const { return class_names_.size(); }
  bool has_class(ClassId id) const { return id < class_names_.size(); }

  const VideoRecord* find(std::string_view video_id) const;

  // Number of records of `id` in `split`.
  std::size_t count(ClassId id, Split split) const;

 private:
  std::vector<VideoRecord> records_;
  std::vector<std::string> class_names_;
  std::unordered_map<std::string, std::size_t> index_;
};

// One record per line: {"video_id": "...", "class_id": 3, "split": "train"}.
// Blank lines are skipped. Parse errors carry the 1-based line number.
std::vector<VideoRecord> parse_manifest_records(std::istream& in, std::string_view source = "<stream>");

// Sidecar JSON array of display names, indexed by class id.
std::vector<std::string> load_class_names(const std::filesystem::path& path);

// `<dir>/<stem>.classes.json` next to a manifest file.
std::filesystem::path sidecar_class_names_path(const std::filesystem::path& manifest_path);

// Loads a JSONL manifest and its class names. Names come from `class_names_path`
// when given, else from the sidecar when it exists, else they are synthesized
// as "class_<id>" for 0..max id seen.
DatasetManifest load_manifest(const std::filesystem::path& path,
                              const std::optional<std::filesystem::path>& class_names_path = std::nullopt);

void write_manifest_records(std::ostream& out, const std::vector<VideoRecord>& records);

}  // namespace retro
