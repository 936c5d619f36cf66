// SPDX-License-Identifier: Apache-2.0
#include "retro/synthesis.hpp"

#include <fstream>
#include <map>
#include <unordered_set>

#include <json.hpp>

#include "retro/error.hpp"

namespace retro {

using nlohmann::json;

std::string_view to_string(Provenance p) { return p == Provenance::kZeroShot ? "zeroshot" : "augment"; }

std::string synthetic_video_id(std::string_view source, TransformId transform) {
  return std::string(source) + "#" + std::string(to_string(transform));
}

std::vector<SyntheticExample> build_augmented(const DatasetManifest& manifest, const ClassTransformMap& map) {
  require_valid(map, manifest);
  std::vector<SyntheticExample> out;
  for (const auto& r : manifest.records()) {
    if (r.split != Split::kTrain) continue;
    const auto image = map.apply(r.class_id);
    if (!image) continue;
    out.push_back({synthetic_video_id(r.video_id, map.transform), r.video_id, map.transform, *image,
                   Provenance::kAugmentation});
  }
  return out;
}

ZeroShotSplit build_zero_shot_subset(const DatasetManifest& manifest, const ClassTransformMap& map,
                                     TransformId transform) {
  if (map.transform != transform) {
    throw Error(ErrorKind::kConfig, "transform map is for " + std::string(to_string(map.transform)) + ", not " +
                                        std::string(to_string(transform)));
  }
  require_valid(map, manifest);
  const auto pairs = equivariant_pairs(map);
  if (pairs.empty()) {
    throw Error(ErrorKind::kEmptySplit, "transform map has no equivariant pairs to turn into zero-shot classes");
  }

  std::vector<std::size_t> train(manifest.class_count(), 0);
  for (const auto& r : manifest.records()) {
    if (r.split == Split::kTrain) ++train[r.class_id];
  }

  ZeroShotSplit split;
  split.transform = transform;
  for (const auto& [a, b] : pairs) {
    // a < b, so a keeps the many-shot role on ties.
    const bool a_many = train[a] >= train[b];
    ZeroShotPair p;
    p.many_shot = a_many ? a : b;
    p.zero_shot = a_many ? b : a;
    p.many_shot_train = train[p.many_shot];
    p.zero_shot_train_removed = train[p.zero_shot];
    split.pairs.push_back(p);
    split.many_shot_classes.insert(p.many_shot);
    split.zero_shot_classes.insert(p.zero_shot);
  }

  std::map<ClassId, ClassId> zero_shot_of;
  for (const auto& p : split.pairs) zero_shot_of[p.many_shot] = p.zero_shot;

  for (const auto& r : manifest.records()) {
    const bool train_record = r.split == Split::kTrain;
    if (train_record && split.zero_shot_classes.contains(r.class_id)) continue;
    split.retained.push_back(r);
    if (!train_record) continue;
    if (auto it = zero_shot_of.find(r.class_id); it != zero_shot_of.end()) {
      split.synthesized.push_back(
          {synthetic_video_id(r.video_id, transform), r.video_id, transform, it->second, Provenance::kZeroShot});
    }
  }
  return split;
}

void write_synthetic_manifest(std::ostream& out, const std::vector<SyntheticExample>& examples) {
  for (const auto& e : examples) {
    nlohmann::ordered_json j = {{"video_id", e.video_id},
                                {"source", e.source_video_id},
                                {"transform", to_string(e.transform)},
                                {"class_id", e.class_id},
                                {"origin", to_string(e.provenance)}};
    out << j.dump() << '\n';
  }
}

std::vector<SyntheticExample> parse_synthetic_manifest(std::istream& in, std::string_view source) {
  std::vector<SyntheticExample> out;
  std::unordered_set<std::string> ids;
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
    for (const char* key : {"video_id", "source", "transform", "origin"}) {
      if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
        throw Error(ErrorKind::kParse, where + "expected a string \"" + key + "\"");
      }
    }
    if (!j.contains("class_id") || !j["class_id"].is_number_unsigned()) {
      throw Error(ErrorKind::kParse, where + "expected a non-negative integer \"class_id\"");
    }
    SyntheticExample e;
    e.video_id = j["video_id"].get<std::string>();
    e.source_video_id = j["source"].get<std::string>();
    const auto transform = try_parse_transform_id(j["transform"].get<std::string>());
    if (!transform) throw Error(ErrorKind::kParse, where + "unknown transform");
    e.transform = *transform;
    e.class_id = j["class_id"].get<ClassId>();
    const auto origin = j["origin"].get<std::string>();
    if (origin == "zeroshot") {
      e.provenance = Provenance::kZeroShot;
    } else if (origin == "augment") {
      e.provenance = Provenance::kAugmentation;
    } else {
      throw Error(ErrorKind::kParse, where + "unknown origin '" + origin + "'");
    }
    if (!ids.insert(e.video_id).second) {
      throw Error(ErrorKind::kValidation, where + "duplicate video_id '" + e.video_id + "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<SyntheticExample> load_synthetic_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open synthetic manifest '" + path.string() + "'");
  return parse_synthetic_manifest(in, path.string());
}

std::uint64_t derive_worker_seed(std::uint64_t master, std::uint64_t worker) {
  // splitmix64 finaliser over the combined value.
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (worker + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

AugmentationSampler::AugmentationSampler(std::vector<ClassTransformMap> maps, double p, std::uint64_t seed)
    : maps_(std::move(maps)), p_(p), rng_(seed) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::kConfig, "augmentation probability must lie in [0, 1], got " + std::to_string(p));
  }
  for (std::size_t i = 0; i < maps_.size(); ++i) {
    for (std::size_t j = i + 1; j < maps_.size(); ++j) {
      if (maps_[i].transform == maps_[j].transform) {
        throw Error(ErrorKind::kConfig,
                    "two class transform maps for " + std::string(to_string(maps_[i].transform)));
      }
    }
  }
}

SampledExample AugmentationSampler::sample(const VideoRecord& record) {
  SampledExample out{record.video_id, {}, record.class_id};
  for (const auto& map : maps_) {
    // 53 high bits -> uniform double in [0, 1); same on every standard library.
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    if (p_ == 0.0) continue;
    const auto image = map.apply(out.label);
    if (!image) {
      throw Error(ErrorKind::kValidation, "class " + std::to_string(out.label) + " of '" + record.video_id +
                                              "' has no label under " + std::string(to_string(map.transform)));
    }
    if (u < p_) {
      out.applied.push_back(map.transform);
      out.label = *image;
    }
  }
  if (!out.applied.empty()) {
    std::string id = record.video_id;
    for (TransformId t : out.applied) id = synthetic_video_id(id, t);
    out.video_id = std::move(id);
  }
  return out;
}

}  // namespace retro
