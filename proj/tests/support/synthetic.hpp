// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "retro/manifest.hpp"
#include "retro/prediction_log.hpp"
#include "retro/tensor.hpp"
#include "retro/transform_map.hpp"

namespace retro::testing {

struct InstanceShape {
  std::size_t min_classes = 3;
  std::size_t max_classes = 20;
  std::size_t min_videos = 5;
  std::size_t max_videos = 50;
  double noise = 0.0;  // per-prediction probability of a random top-1
  TransformId transform = TransformId::kTR;
};

// A manifest, a complete prediction log and the map the log was planted from.
struct PlantedInstance {
  DatasetManifest manifest;
  PredictionLog log;
  ClassTransformMap planted;
};

// Originals predict the true class; transformed clips of mapped classes
// predict the image under the map; transformed clips of novel classes cycle
// through the other classes. Noise then replaces each top-1 independently.
// Rankings hold min(5, classes) distinct ids.
PlantedInstance make_planted_instance(std::mt19937_64& rng, const InstanceShape& shape);

// Random map over `classes` ids: each class is invariant, novel or half of
// an equivariant pair.
ClassTransformMap random_map(std::mt19937_64& rng, std::size_t classes, TransformId transform);

// Manifest with `classes` classes and a random number of videos per class
// and split.
DatasetManifest random_manifest(std::mt19937_64& rng, std::size_t classes, std::size_t min_videos,
                                std::size_t max_videos);

FrameTensor random_tensor(std::mt19937_64& rng, Dims max_dims, DType dtype, Layout layout);

}  // namespace retro::testing
