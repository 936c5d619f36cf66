// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "retro/manifest.hpp"
#include "retro/tensor.hpp"

namespace retro {

enum class EntryKind : std::uint8_t { kInvariant, kEquivariant, kNovel };

std::string_view to_string(EntryKind kind);

// What a class becomes under a video transform.
struct ClassEntry {
  EntryKind kind = EntryKind::kNovel;
  ClassId target = 0;               // meaningful for kEquivariant only
  std::optional<bool> realistic;    // kNovel only; reporting metadata

  static ClassEntry invariant() { return {EntryKind::kInvariant, 0, std::nullopt}; }
  static ClassEntry equivariant(ClassId target) { return {EntryKind::kEquivariant, target, std::nullopt}; }
  static ClassEntry novel(std::optional<bool> realistic = std::nullopt) {
    return {EntryKind::kNovel, 0, realistic};
  }

  bool has_mapping() const { return kind != EntryKind::kNovel; }

  friend bool operator==(const ClassEntry&, const ClassEntry&) = default;
};

// The label transform induced by a video transform. Serves as hand-authored
// ground truth and as the output of discovery.
struct ClassTransformMap {
  TransformId transform = TransformId::kTR;
  std::map<ClassId, ClassEntry> entries;

  const ClassEntry* find(ClassId id) const;
  // Image of `id`: itself for invariant, the target for equivariant,
  // nullopt for novel or absent classes.
  std::optional<ClassId> apply(ClassId id) const;

  friend bool operator==(const ClassTransformMap&, const ClassTransformMap&) = default;
};

enum class ViolationKind : std::uint8_t { kAsymmetricPair, kSelfTarget, kUnknownClass };

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  ClassId class_id;
  std::string message;
};

// Every broken invariant, in ascending class order. Empty means valid.
std::vector<Violation> validate_transform_map(const ClassTransformMap& map, const DatasetManifest& manifest);

// Throws kValidation listing the violations, if any.
void require_valid(const ClassTransformMap& map, const DatasetManifest& manifest);

struct CategoryCounts {
  std::size_t invariant = 0;
  std::size_t equivariant = 0;
  std::size_t novel_realistic = 0;
  std::size_t novel_unrealistic = 0;

  std::size_t total() const { return invariant + equivariant + novel_realistic + novel_unrealistic; }
  friend bool operator==(const CategoryCounts&, const CategoryCounts&) = default;
};

// Novel entries without a realistic flag count as realistic.
CategoryCounts category_counts(const ClassTransformMap& map);

// Equivariant pairs (smaller id first), ascending by the smaller id.
std::vector<std::pair<ClassId, ClassId>> equivariant_pairs(const ClassTransformMap& map);

// {"transform": "TR", "classes": {"0": {"kind": "invariant"}, "1": {"kind": "equivariant", "target": 2}, ...}}
nlohmann::ordered_json to_json(const ClassTransformMap& map);
ClassTransformMap transform_map_from_json(const nlohmann::json& j);
ClassTransformMap load_transform_map(const std::filesystem::path& path);
void save_transform_map(const std::filesystem::path& path, const ClassTransformMap& map);

}  // namespace retro
