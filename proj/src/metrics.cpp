// SPDX-License-Identifier: Apache-2.0
#include "retro/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "retro/error.hpp"

namespace retro {

namespace {

struct Example {
  const VideoRecord* record;
  ClassId expected;
  const Ranking* ranking;
};

// Calls fn(example) for every scored example; returns the excluded count.
template <typename Fn>
std::size_t for_each_example(const PredictionLog& log, const DatasetManifest& manifest, const EvalOptions& opts,
                             Fn&& fn) {
  std::size_t excluded = 0;
  for (const auto& r : manifest.records()) {
    if (opts.split && r.split != *opts.split) continue;
    const Ranking* ranking = log.find(r.video_id, opts.source);
    if (ranking == nullptr) continue;
    ClassId expected = r.class_id;
    if (opts.label_map != nullptr) {
      const auto image = opts.label_map->apply(r.class_id);
      if (!image) {
        ++excluded;
        continue;
      }
      expected = *image;
    }
    fn(Example{&r, expected, ranking});
  }
  return excluded;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char ch : text) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

}  // namespace

double topk_accuracy(const PredictionLog& log, const DatasetManifest& manifest, std::size_t k,
                     const std::optional<std::set<ClassId>>& filter, const EvalOptions& opts) {
  if (k == 0) throw Error(ErrorKind::kConfig, "k must be at least 1");
  if (filter) {
    for (ClassId id : *filter) {
      if (!manifest.has_class(id)) {
        throw Error(ErrorKind::kValidation, "class filter names class " + std::to_string(id) + " outside the manifest");
      }
    }
  }
  std::size_t scored = 0;
  std::size_t hits = 0;
  for_each_example(log, manifest, opts, [&](const Example& e) {
    if (filter && !filter->contains(e.record->class_id)) return;
    if (e.ranking->size() < k) {
      throw Error(ErrorKind::kConfig, "top-" + std::to_string(k) + " requested but '" + e.record->video_id +
                                          "' has only " + std::to_string(e.ranking->size()) + " ranked classes");
    }
    ++scored;
    const auto end = e.ranking->begin() + static_cast<std::ptrdiff_t>(k);
    if (std::find(e.ranking->begin(), end, e.expected) != end) ++hits;
  });
  if (scored == 0) throw Error(ErrorKind::kUndefinedMetric, "top-" + std::to_string(k) + " accuracy over zero examples");
  return static_cast<double>(hits) / static_cast<double>(scored);
}

std::size_t ConfusionMatrix::row_sum(std::size_t row) const {
  const auto begin = counts.begin() + static_cast<std::ptrdiff_t>(row * size());
  return std::accumulate(begin, begin + static_cast<std::ptrdiff_t>(size()), std::size_t{0});
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

std::size_t ConfusionMatrix::position(ClassId id) const {
  auto it = std::find(order.begin(), order.end(), id);
  if (it == order.end()) throw Error(ErrorKind::kValidation, "class " + std::to_string(id) + " not in matrix");
  return static_cast<std::size_t>(it - order.begin());
}

bool ConfusionMatrix::is_diagonal() const {
  for (std::size_t r = 0; r < size(); ++r) {
    for (std::size_t c = 0; c < size(); ++c) {
      if (r != c && at(r, c) != 0) return false;
    }
  }
  return true;
}

std::vector<ClassId> confusion_order(std::size_t class_count, const ClassTransformMap* map) {
  std::vector<ClassId> order;
  order.reserve(class_count);
  std::vector<bool> placed(class_count, false);
  if (map != nullptr) {
    for (const auto& [a, b] : equivariant_pairs(*map)) {
      if (a >= class_count || b >= class_count) continue;
      order.push_back(a);
      order.push_back(b);
      placed[a] = placed[b] = true;
    }
  }
  for (ClassId id = 0; id < class_count; ++id) {
    if (!placed[id]) order.push_back(id);
  }
  return order;
}

ConfusionMatrix confusion(const PredictionLog& log, const DatasetManifest& manifest, const ClassTransformMap* map,
                          bool apply_label_transform, EvalOptions opts) {
  if (apply_label_transform && map == nullptr) {
    throw Error(ErrorKind::kConfig, "label transform requested without a class transform map");
  }
  if (map != nullptr) require_valid(*map, manifest);
  opts.label_map = apply_label_transform ? map : nullptr;

  ConfusionMatrix cm;
  cm.order = confusion_order(manifest.class_count(), map);
  const std::size_t n = cm.order.size();
  cm.counts.assign(n * n, 0);
  std::vector<std::size_t> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[cm.order[i]] = i;

  cm.excluded = for_each_example(log, manifest, opts, [&](const Example& e) {
    const ClassId predicted = e.ranking->front();
    if (!manifest.has_class(predicted)) {
      throw Error(ErrorKind::kValidation, "prediction for '" + e.record->video_id + "' names class " +
                                              std::to_string(predicted) + " outside the manifest");
    }
    ++cm.counts[pos[e.expected] * n + pos[predicted]];
  });
  return cm;
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
  out << "true\\pred";
  for (ClassId id : cm.order) out << ',' << id;
  out << '\n';
  for (std::size_t r = 0; r < cm.size(); ++r) {
    out << cm.order[r];
    for (std::size_t c = 0; c < cm.size(); ++c) out << ',' << cm.at(r, c);
    out << '\n';
  }
}

void write_confusion_pgm(const std::filesystem::path& path, const ConfusionMatrix& cm, std::size_t cell_pixels) {
  const std::size_t n = cm.size();
  const std::size_t side = std::max<std::size_t>(n * cell_pixels, 1);
  std::vector<unsigned char> pixels(side * side, 255);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t sum = cm.row_sum(r);
    for (std::size_t c = 0; c < n; ++c) {
      const double mass = sum == 0 ? 0.0 : static_cast<double>(cm.at(r, c)) / static_cast<double>(sum);
      const auto shade = static_cast<unsigned char>(255.0 * (1.0 - mass) + 0.5);
      for (std::size_t y = 0; y < cell_pixels; ++y) {
        std::fill_n(pixels.begin() + static_cast<std::ptrdiff_t>((r * cell_pixels + y) * side + c * cell_pixels),
                    cell_pixels, shade);
      }
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  out << "P5\n" << side << ' ' << side << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw Error(ErrorKind::kIo, "failed writing '" + path.string() + "'");
}

std::vector<ClassGroup> load_class_groups(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open group file '" + path.string() + "'");
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::ordered_json::parse_error& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kParse, path.string() + ": expected {group name: [class ids]}");
  std::vector<ClassGroup> groups;
  for (const auto& [name, ids] : j.items()) {
    if (!ids.is_array()) throw Error(ErrorKind::kParse, path.string() + ": group '" + name + "' is not an array");
    ClassGroup g{name, {}};
    for (const auto& id : ids) {
      if (!id.is_number_unsigned()) {
        throw Error(ErrorKind::kParse, path.string() + ": group '" + name + "' holds a non-class-id value");
      }
      g.classes.insert(id.get<ClassId>());
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

BreakdownRow breakdown_row(const PredictionLog& log, const DatasetManifest& manifest, const ClassGroup& group,
                           const std::vector<std::size_t>& ks, const EvalOptions& opts) {
  BreakdownRow row{group.name, 0, {}};
  for_each_example(log, manifest, opts, [&](const Example& e) {
    if (group.classes.contains(e.record->class_id)) ++row.examples;
  });
  for (std::size_t k : ks) {
    if (row.examples == 0) {
      row.accuracy.emplace_back(std::nullopt);
    } else {
      row.accuracy.emplace_back(topk_accuracy(log, manifest, k, group.classes, opts));
    }
  }
  return row;
}

std::vector<BreakdownRow> breakdown(const PredictionLog& log, const DatasetManifest& manifest,
                                    const std::vector<ClassGroup>& groups, const std::vector<std::size_t>& ks,
                                    const EvalOptions& opts) {
  std::vector<BreakdownRow> rows;
  rows.reserve(groups.size());
  for (const auto& g : groups) {
    for (ClassId id : g.classes) {
      if (!manifest.has_class(id)) {
        throw Error(ErrorKind::kValidation, "group '" + g.name + "' names class " + std::to_string(id) +
                                                " outside the manifest");
      }
    }
    rows.push_back(breakdown_row(log, manifest, g, ks, opts));
  }
  return rows;
}

void write_breakdown_csv(std::ostream& out, const std::vector<BreakdownRow>& rows, const std::vector<std::size_t>& ks) {
  out << "group,n";
  for (std::size_t k : ks) out << ",top" << k;
  out << '\n';
  for (const auto& row : rows) {
    out << csv_field(row.name) << ',' << row.examples;
    for (const auto& acc : row.accuracy) {
      if (acc) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", *acc);
        out << ',' << buf;
      } else {
        out << ",n/a";
      }
    }
    out << '\n';
  }
}

}  // namespace retro
