// SPDX-License-Identifier: Apache-2.0
#include "retro/manifest.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "retro/error.hpp"

namespace retro {

using nlohmann::json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

std::optional<Split> try_parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val" || text == "validation") return Split::kVal;
  if (text == "test") return Split::kTest;
  return std::nullopt;
}

DatasetManifest::DatasetManifest(std::vector<VideoRecord> records, std::vector<std::string> class_names)
    : records_(std::move(records)), class_names_(std::move(class_names)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!index_.emplace(r.video_id, i).second) {
      throw Error(ErrorKind::kValidation, "duplicate video_id '" + r.video_id + "'");
    }
    if (!has_class(r.class_id)) {
      throw Error(ErrorKind::kValidation, "video '" + r.video_id + "' has unknown class_id " +
                                              std::to_string(r.class_id) + " (" +
                                              std::to_string(class_names_.size()) + " classes named)");
    }
  }
}

const VideoRecord* DatasetManifest::find(std::string_view video_id) const {
  auto it = index_.find(std::string(video_id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::size_t DatasetManifest::count(ClassId id, Split split) const {
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [&](const VideoRecord& r) {
    return r.class_id == id && r.split == split;
  }));
}

std::vector<VideoRecord> parse_manifest_records(std::istream& in, std::string_view source) {
  std::vector<VideoRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::kParse, where + e.what());
    }
    if (!j.is_object() || !j.contains("video_id") || !j["video_id"].is_string()) {
      throw Error(ErrorKind::kParse, where + "expected a string \"video_id\"");
    }
    if (!j.contains("class_id") || !j["class_id"].is_number_unsigned()) {
      throw Error(ErrorKind::kParse, where + "expected a non-negative integer \"class_id\"");
    }
    VideoRecord r;
    r.video_id = j["video_id"].get<std::string>();
    r.class_id = j["class_id"].get<ClassId>();
    if (j.contains("split")) {
      if (!j["split"].is_string()) throw Error(ErrorKind::kParse, where + "\"split\" must be a string");
      auto split = try_parse_split(j["split"].get<std::string>());
      if (!split) throw Error(ErrorKind::kParse, where + "unknown split '" + j["split"].get<std::string>() + "'");
      r.split = *split;
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<std::string> load_class_names(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open class names '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  if (!j.is_array()) throw Error(ErrorKind::kParse, path.string() + ": expected a JSON array of class names");
  std::vector<std::string> names;
  for (const auto& item : j) {
    if (!item.is_string()) throw Error(ErrorKind::kParse, path.string() + ": class names must be strings");
    names.push_back(item.get<std::string>());
  }
  return names;
}

std::filesystem::path sidecar_class_names_path(const std::filesystem::path& manifest_path) {
  auto sidecar = manifest_path;
  sidecar.replace_filename(manifest_path.stem().string() + ".classes.json");
  return sidecar;
}

DatasetManifest load_manifest(const std::filesystem::path& path,
                              const std::optional<std::filesystem::path>& class_names_path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open manifest '" + path.string() + "'");
  auto records = parse_manifest_records(in, path.string());

  std::vector<std::string> names;
  if (class_names_path) {
    names = load_class_names(*class_names_path);
  } else if (auto sidecar = sidecar_class_names_path(path); std::filesystem::exists(sidecar)) {
    names = load_class_names(sidecar);
  } else {
    ClassId max_id = 0;
    for (const auto& r : records) max_id = std::max(max_id, r.class_id);
    if (!records.empty()) {
      for (ClassId id = 0; id <= max_id; ++id) names.push_back("class_" + std::to_string(id));
    }
  }
  try {
    return DatasetManifest(std::move(records), std::move(names));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_manifest_records(std::ostream& out, const std::vector<VideoRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j = {{"video_id", r.video_id}, {"class_id", r.class_id}, {"split", to_string(r.split)}};
    out << j.dump() << '\n';
  }
}

}  // namespace retro
