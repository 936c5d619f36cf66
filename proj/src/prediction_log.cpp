// SPDX-License-Identifier: Apache-2.0
#include "retro/prediction_log.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "retro/error.hpp"

namespace retro {

using nlohmann::json;

std::string describe(const PredictionSource& source) {
  return source.transform ? "transformed/" + std::string(to_string(*source.transform)) : "original";
}

PredictionLog::Table& PredictionLog::table(const PredictionSource& source) {
  return source.transform ? transformed_[*source.transform] : original_;
}

const PredictionLog::Table* PredictionLog::table(const PredictionSource& source) const {
  if (!source.transform) return &original_;
  auto it = transformed_.find(*source.transform);
  return it == transformed_.end() ? nullptr : &it->second;
}

void PredictionLog::add(const std::string& video_id, PredictionSource source, Ranking ranking) {
  if (ranking.empty()) {
    throw Error(ErrorKind::kValidation, "empty ranking for '" + video_id + "' (" + describe(source) + ")");
  }
  std::unordered_set<ClassId> seen;
  for (ClassId id : ranking) {
    if (!seen.insert(id).second) {
      throw Error(ErrorKind::kValidation, "ranking for '" + video_id + "' (" + describe(source) +
                                              ") repeats class " + std::to_string(id));
    }
  }
  const std::size_t length = ranking.size();
  if (!table(source).emplace(video_id, std::move(ranking)).second) {
    throw Error(ErrorKind::kValidation, "duplicate prediction for '" + video_id + "' (" + describe(source) + ")");
  }
  min_length_ = size() == 1 ? length : std::min(min_length_, length);
}

const Ranking* PredictionLog::find(std::string_view video_id, const PredictionSource& source) const {
  const Table* t = table(source);
  if (t == nullptr) return nullptr;
  auto it = t->find(std::string(video_id));
  return it == t->end() ? nullptr : &it->second;
}

std::size_t PredictionLog::size() const {
  std::size_t n = original_.size();
  for (const auto& [id, t] : transformed_) n += t.size();
  return n;
}

std::vector<PredictionLog::EntryView> PredictionLog::entries() const {
  std::vector<EntryView> out;
  out.reserve(size());
  auto append = [&out](const Table& t, PredictionSource source) {
    const std::size_t first = out.size();
    for (const auto& [id, ranking] : t) out.push_back({&id, source, &ranking});
    std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(),
              [](const EntryView& a, const EntryView& b) { return *a.video_id < *b.video_id; });
  };
  append(original_, PredictionSource::original());
  for (const auto& [id, t] : transformed_) append(t, PredictionSource::transformed(id));
  return out;
}

PredictionLog parse_prediction_log(std::istream& in, std::string_view source) {
  PredictionLog log;
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
    if (!j.contains("variant") || !j["variant"].is_string()) {
      throw Error(ErrorKind::kParse, where + "expected a string \"variant\"");
    }
    const auto variant = j["variant"].get<std::string>();
    const bool has_transform = j.contains("transform") && !j["transform"].is_null();
    PredictionSource src;
    if (variant == "original") {
      if (has_transform) throw Error(ErrorKind::kParse, where + "original entries must have a null \"transform\"");
    } else if (variant == "transformed") {
      if (!has_transform || !j["transform"].is_string()) {
        throw Error(ErrorKind::kParse, where + "transformed entries need a \"transform\"");
      }
      auto id = try_parse_transform_id(j["transform"].get<std::string>());
      if (!id) throw Error(ErrorKind::kParse, where + "unknown transform '" + j["transform"].get<std::string>() + "'");
      src.transform = *id;
    } else {
      throw Error(ErrorKind::kParse, where + "unknown variant '" + variant + "'");
    }
    if (!j.contains("ranking") || !j["ranking"].is_array()) {
      throw Error(ErrorKind::kParse, where + "expected an array \"ranking\"");
    }
    Ranking ranking;
    for (const auto& item : j["ranking"]) {
      if (!item.is_number_unsigned()) throw Error(ErrorKind::kParse, where + "ranking entries must be class ids");
      ranking.push_back(item.get<ClassId>());
    }
    try {
      log.add(j["video_id"].get<std::string>(), src, std::move(ranking));
    } catch (const Error& e) {
      throw Error(e.kind(), where + e.what());
    }
  }
  return log;
}

PredictionLog load_prediction_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open prediction log '" + path.string() + "'");
  return parse_prediction_log(in, path.string());
}

void write_prediction_log(std::ostream& out, const PredictionLog& log) {
  for (const auto& e : log.entries()) {
    nlohmann::ordered_json j;
    j["video_id"] = *e.video_id;
    j["variant"] = e.source.transform ? "transformed" : "original";
    j["transform"] = e.source.transform ? json(to_string(*e.source.transform)) : json(nullptr);
    j["ranking"] = *e.ranking;
    out << j.dump() << '\n';
  }
}

}  // namespace retro
