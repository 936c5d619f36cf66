// SPDX-License-Identifier: Apache-2.0
#include "retro/transform_map.hpp"

#include <charconv>
#include <fstream>

#include "retro/error.hpp"

namespace retro {

using nlohmann::json;

std::string_view to_string(EntryKind kind) {
  switch (kind) {
    case EntryKind::kInvariant: return "invariant";
    case EntryKind::kEquivariant: return "equivariant";
    case EntryKind::kNovel: return "novel";
  }
  return "?";
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kAsymmetricPair: return "asymmetric-pair";
    case ViolationKind::kSelfTarget: return "self-target";
    case ViolationKind::kUnknownClass: return "unknown-class";
  }
  return "?";
}

const ClassEntry* ClassTransformMap::find(ClassId id) const {
  auto it = entries.find(id);
  return it == entries.end() ? nullptr : &it->second;
}

std::optional<ClassId> ClassTransformMap::apply(ClassId id) const {
  const ClassEntry* e = find(id);
  if (e == nullptr) return std::nullopt;
  switch (e->kind) {
    case EntryKind::kInvariant: return id;
    case EntryKind::kEquivariant: return e->target;
    case EntryKind::kNovel: return std::nullopt;
  }
  return std::nullopt;
}

std::vector<Violation> validate_transform_map(const ClassTransformMap& map, const DatasetManifest& manifest) {
  std::vector<Violation> out;
  for (const auto& [id, entry] : map.entries) {
    if (!manifest.has_class(id)) {
      out.push_back({ViolationKind::kUnknownClass, id, "class " + std::to_string(id) + " is not in the manifest"});
      continue;
    }
    if (entry.kind != EntryKind::kEquivariant) continue;
    if (entry.target == id) {
      out.push_back({ViolationKind::kSelfTarget, id,
                     "class " + std::to_string(id) + " is equivariant with itself; use invariant"});
    } else if (!manifest.has_class(entry.target)) {
      out.push_back({ViolationKind::kUnknownClass, id,
                     "class " + std::to_string(id) + " targets unknown class " + std::to_string(entry.target)});
    } else {
      const ClassEntry* back = map.find(entry.target);
      if (back == nullptr || back->kind != EntryKind::kEquivariant || back->target != id) {
        out.push_back({ViolationKind::kAsymmetricPair, id,
                       "class " + std::to_string(id) + " -> " + std::to_string(entry.target) + " but class " +
                           std::to_string(entry.target) + " does not map back"});
      }
    }
  }
  return out;
}

void require_valid(const ClassTransformMap& map, const DatasetManifest& manifest) {
  const auto violations = validate_transform_map(map, manifest);
  if (violations.empty()) return;
  std::string msg = "invalid class transform map:";
  for (const auto& v : violations) msg += "\n  [" + std::string(to_string(v.kind)) + "] " + v.message;
  throw Error(ErrorKind::kValidation, msg);
}

CategoryCounts category_counts(const ClassTransformMap& map) {
  CategoryCounts counts;
  for (const auto& [id, entry] : map.entries) {
    switch (entry.kind) {
      case EntryKind::kInvariant: ++counts.invariant; break;
      case EntryKind::kEquivariant: ++counts.equivariant; break;
      case EntryKind::kNovel:
        if (entry.realistic.value_or(true)) {
          ++counts.novel_realistic;
        } else {
          ++counts.novel_unrealistic;
        }
        break;
    }
  }
  return counts;
}

std::vector<std::pair<ClassId, ClassId>> equivariant_pairs(const ClassTransformMap& map) {
  std::vector<std::pair<ClassId, ClassId>> pairs;
  for (const auto& [id, entry] : map.entries) {
    if (entry.kind != EntryKind::kEquivariant || entry.target <= id) continue;
    const ClassEntry* back = map.find(entry.target);
    if (back != nullptr && back->kind == EntryKind::kEquivariant && back->target == id) {
      pairs.emplace_back(id, entry.target);
    }
  }
  return pairs;
}

nlohmann::ordered_json to_json(const ClassTransformMap& map) {
  nlohmann::ordered_json classes = nlohmann::ordered_json::object();
  for (const auto& [id, entry] : map.entries) {
    nlohmann::ordered_json e = {{"kind", to_string(entry.kind)}};
    if (entry.kind == EntryKind::kEquivariant) e["target"] = entry.target;
    if (entry.kind == EntryKind::kNovel && entry.realistic) e["realistic"] = *entry.realistic;
    classes[std::to_string(id)] = std::move(e);
  }
  return {{"transform", to_string(map.transform)}, {"classes", std::move(classes)}};
}

namespace {

ClassId parse_class_key(const std::string& key) {
  ClassId id = 0;
  const auto* end = key.data() + key.size();
  auto [ptr, ec] = std::from_chars(key.data(), end, id);
  if (key.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::kParse, "class key '" + key + "' is not a non-negative integer");
  }
  return id;
}

}  // namespace

ClassTransformMap transform_map_from_json(const json& j) {
  // A discovery report carries its map under "map" next to a diagnostics array.
  if (j.is_object() && j.contains("map") && j["map"].is_object() && !(j.contains("classes") && j["classes"].is_object())) {
    return transform_map_from_json(j["map"]);
  }
  if (!j.is_object() || !j.contains("transform") || !j["transform"].is_string()) {
    throw Error(ErrorKind::kParse, "transform map needs a string \"transform\"");
  }
  ClassTransformMap map;
  const auto transform = try_parse_transform_id(j["transform"].get<std::string>());
  if (!transform) throw Error(ErrorKind::kParse, "unknown transform '" + j["transform"].get<std::string>() + "'");
  map.transform = *transform;

  if (!j.contains("classes") || !j["classes"].is_object()) {
    throw Error(ErrorKind::kParse, "transform map needs an object \"classes\"");
  }
  for (const auto& [key, value] : j["classes"].items()) {
    const ClassId id = parse_class_key(key);
    if (!value.is_object() || !value.contains("kind") || !value["kind"].is_string()) {
      throw Error(ErrorKind::kParse, "class " + key + ": entry needs a string \"kind\"");
    }
    const auto kind = value["kind"].get<std::string>();
    ClassEntry entry;
    if (kind == "invariant") {
      entry = ClassEntry::invariant();
    } else if (kind == "equivariant") {
      if (!value.contains("target") || !value["target"].is_number_unsigned()) {
        throw Error(ErrorKind::kParse, "class " + key + ": equivariant entry needs an integer \"target\"");
      }
      entry = ClassEntry::equivariant(value["target"].get<ClassId>());
    } else if (kind == "novel") {
      entry = ClassEntry::novel();
      if (value.contains("realistic")) {
        if (!value["realistic"].is_boolean()) {
          throw Error(ErrorKind::kParse, "class " + key + ": \"realistic\" must be a boolean");
        }
        entry.realistic = value["realistic"].get<bool>();
      }
    } else {
      throw Error(ErrorKind::kParse, "class " + key + ": unknown kind '" + kind + "'");
    }
    if (!map.entries.emplace(id, entry).second) {
      throw Error(ErrorKind::kParse, "class " + key + " listed twice");
    }
  }
  return map;
}

ClassTransformMap load_transform_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open transform map '" + path.string() + "'");
  try {
    return transform_map_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_transform_map(const std::filesystem::path& path, const ClassTransformMap& map) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  out << to_json(map).dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "failed writing '" + path.string() + "'");
}

}  // namespace retro
