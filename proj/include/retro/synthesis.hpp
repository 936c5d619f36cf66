// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "retro/manifest.hpp"
#include "retro/transform_map.hpp"

namespace retro {

enum class Provenance : std::uint8_t { kAugmentation, kZeroShot };

std::string_view to_string(Provenance p);

// A transformed copy of a real training video, described by reference.
// Materialising the pixels is a separate step over RTEN files.
struct SyntheticExample {
  std::string video_id;         // "<source>#<transform>"
  std::string source_video_id;
  TransformId transform = TransformId::kTR;
  ClassId class_id = 0;
  Provenance provenance = Provenance::kAugmentation;

  friend bool operator==(const SyntheticExample&, const SyntheticExample&) = default;
};

std::string synthetic_video_id(std::string_view source, TransformId transform);

// Target-conditional augmentation: every training video of a class with a
// mapping contributes one transformed copy labelled with its image under the
// map. Invariant classes gain a copy of each of their own videos; each
// equivariant class gains the transformed videos of its counterpart.
// Throws kValidation if the map fails validate_transform_map.
std::vector<SyntheticExample> build_augmented(const DatasetManifest& manifest, const ClassTransformMap& map);

struct ZeroShotPair {
  ClassId many_shot = 0;
  ClassId zero_shot = 0;
  std::size_t many_shot_train = 0;
  std::size_t zero_shot_train_removed = 0;
};

struct ZeroShotSplit {
  TransformId transform = TransformId::kTR;
  std::vector<ZeroShotPair> pairs;      // ascending by the pair's smaller id
  std::set<ClassId> many_shot_classes;
  std::set<ClassId> zero_shot_classes;
  std::vector<VideoRecord> retained;    // manifest minus zero-shot training videos
  std::vector<SyntheticExample> synthesized;
};

// Turns each equivariant pair into a many-shot class (more training videos,
// lower id on ties) and a zero-shot class whose training videos are all
// removed and replaced by transformed many-shot videos. Validation and test
// videos are kept. Throws kConfig when the map belongs to another transform,
// kValidation for an invalid map and kEmptySplit without equivariant pairs.
ZeroShotSplit build_zero_shot_subset(const DatasetManifest& manifest, const ClassTransformMap& map,
                                     TransformId transform);

// {"video_id": "...", "source": "...", "transform": "TR", "class_id": 12, "origin": "zeroshot"|"augment"}
void write_synthetic_manifest(std::ostream& out, const std::vector<SyntheticExample>& examples);
std::vector<SyntheticExample> parse_synthetic_manifest(std::istream& in, std::string_view source = "<stream>");
std::vector<SyntheticExample> load_synthetic_manifest(const std::filesystem::path& path);

// Independent stream for worker `worker` of a loader seeded with `master`.
std::uint64_t derive_worker_seed(std::uint64_t master, std::uint64_t worker);

struct SampledExample {
  std::string video_id;
  std::vector<TransformId> applied;  // in application order
  ClassId label = 0;
};

// Online augmentation: each transform of the set is applied independently
// with probability p, and the label follows each applied class transform in
// turn. Exactly one generator draw per transform per example; the decision
// sequence depends only on the seed and the number of calls.
class AugmentationSampler {
 public:
  // `maps` are applied in the given order. Throws kConfig for p outside
  // [0, 1] or two maps for the same transform.
  AugmentationSampler(std::vector<ClassTransformMap> maps, double p, std::uint64_t seed);

  // Throws kValidation when the current label has no mapping under a
  // transform that can fire (p > 0), whether or not it fires this draw.
  SampledExample sample(const VideoRecord& record);

 private:
  std::vector<ClassTransformMap> maps_;
  double p_;
  std::mt19937_64 rng_;
};

}  // namespace retro
