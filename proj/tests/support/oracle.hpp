// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "retro/manifest.hpp"
#include "retro/prediction_log.hpp"
#include "retro/transform_map.hpp"

namespace retro::testing {

// Brute-force discovery: dense recount of the log and direct evaluation of
// recall, transfer, affinity, the piecewise rule and the consistency pass.
// Shares no code with the library beyond its data types.
struct OracleDiscovery {
  std::vector<double> recall;
  std::vector<std::vector<double>> gamma;  // dense n x n
  std::vector<std::vector<double>> omega;  // dense n x n
  std::vector<std::optional<ClassId>> candidate;
  std::vector<bool> established;
  std::vector<bool> conflict;
  ClassTransformMap map;
};

// Returns nullopt when the log lacks a transformed prediction that the
// computation needs or a class has no evaluated video.
std::optional<OracleDiscovery> oracle_discover(const PredictionLog& log, const DatasetManifest& manifest,
                                               TransformId transform, double lambda, double alpha);

// Recounted top-k accuracy; nullopt when no example qualifies.
std::optional<double> oracle_topk(const PredictionLog& log, const DatasetManifest& manifest, std::size_t k);

}  // namespace retro::testing
