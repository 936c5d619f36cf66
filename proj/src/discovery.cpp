// SPDX-License-Identifier: Apache-2.0
#include "retro/discovery.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <thread>

#include "retro/error.hpp"

namespace retro {

namespace {

constexpr std::size_t kMaxMissingInMessage = 10;

void require_unit_interval(double value, std::string_view name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorKind::kConfig, std::string(name) + " must lie in [0, 1], got " + std::to_string(value));
  }
}

DiscoveryCounts empty_counts(TransformId transform, std::size_t classes) {
  DiscoveryCounts c;
  c.transform = transform;
  c.videos.assign(classes, 0);
  c.correct.assign(classes, 0);
  c.transfer.assign(classes, {});
  return c;
}

ClassId checked_top1(const Ranking& ranking, const DatasetManifest& manifest, const std::string& video_id) {
  const ClassId top1 = ranking.front();
  if (!manifest.has_class(top1)) {
    throw Error(ErrorKind::kValidation, "prediction for '" + video_id + "' names class " + std::to_string(top1) +
                                            " outside the manifest");
  }
  return top1;
}

void count_range(const PredictionLog& log, const DatasetManifest& manifest, std::size_t begin, std::size_t end,
                 DiscoveryCounts& out) {
  const auto transformed = PredictionSource::transformed(out.transform);
  const auto& records = manifest.records();
  for (std::size_t i = begin; i < end; ++i) {
    const VideoRecord& r = records[i];
    const Ranking* original = log.find(r.video_id, PredictionSource::original());
    if (original == nullptr) continue;
    ++out.videos[r.class_id];
    if (checked_top1(*original, manifest, r.video_id) != r.class_id) continue;
    ++out.correct[r.class_id];
    const Ranking* after = log.find(r.video_id, transformed);
    if (after == nullptr) {
      out.missing.push_back(r.video_id);
      continue;
    }
    ++out.transfer[r.class_id][checked_top1(*after, manifest, r.video_id)];
  }
}

bool omega_candidate_better(double omega, ClassId id, double best_omega, std::optional<ClassId> best) {
  if (!best) return true;
  return omega > best_omega || (omega == best_omega && id < *best);
}

}  // namespace

void DiscoveryConfig::validate() const {
  require_unit_interval(lambda, "lambda");
  require_unit_interval(alpha, "alpha");
}

void DiscoveryCounts::merge(const DiscoveryCounts& other) {
  if (other.class_count() != class_count() || other.transform != transform) {
    throw Error(ErrorKind::kConfig, "cannot merge discovery counts over different classes or transforms");
  }
  for (std::size_t y = 0; y < class_count(); ++y) {
    videos[y] += other.videos[y];
    correct[y] += other.correct[y];
    for (const auto& [to, n] : other.transfer[y]) transfer[y][to] += n;
  }
  missing.insert(missing.end(), other.missing.begin(), other.missing.end());
  std::sort(missing.begin(), missing.end());
}

DiscoveryCounts count_predictions(const PredictionLog& log, const DatasetManifest& manifest, TransformId transform,
                                  unsigned jobs) {
  const std::size_t n = manifest.records().size();
  const std::size_t parts = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  std::vector<DiscoveryCounts> partial(parts, empty_counts(transform, manifest.class_count()));
  if (parts == 1) {
    count_range(log, manifest, 0, n, partial[0]);
  } else {
    std::vector<std::exception_ptr> errors(parts);
    std::vector<std::thread> workers;
    for (std::size_t p = 0; p < parts; ++p) {
      workers.emplace_back([&, p] {
        try {
          count_range(log, manifest, n * p / parts, n * (p + 1) / parts, partial[p]);
        } catch (...) {
          errors[p] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  DiscoveryCounts total = empty_counts(transform, manifest.class_count());
  for (const auto& part : partial) total.merge(part);
  return total;
}

double class_recall(const DiscoveryCounts& counts, ClassId y) {
  if (y >= counts.class_count()) {
    throw Error(ErrorKind::kValidation, "class " + std::to_string(y) + " is not in the manifest");
  }
  if (counts.videos[y] == 0) {
    throw Error(ErrorKind::kUndefinedMetric, "recall of class " + std::to_string(y) + " is undefined: no evaluated videos");
  }
  return static_cast<double>(counts.correct[y]) / static_cast<double>(counts.videos[y]);
}

double class_recall(const PredictionLog& log, const DatasetManifest& manifest, ClassId y) {
  if (!manifest.has_class(y)) {
    throw Error(ErrorKind::kValidation, "class " + std::to_string(y) + " is not in the manifest");
  }
  std::size_t videos = 0;
  std::size_t correct = 0;
  for (const auto& r : manifest.records()) {
    if (r.class_id != y) continue;
    const Ranking* original = log.find(r.video_id, PredictionSource::original());
    if (original == nullptr) continue;
    ++videos;
    if (original->front() == y) ++correct;
  }
  if (videos == 0) {
    throw Error(ErrorKind::kUndefinedMetric, "recall of class " + std::to_string(y) + " is undefined: no evaluated videos");
  }
  return static_cast<double>(correct) / static_cast<double>(videos);
}

TransferMatrix::TransferMatrix(const DiscoveryCounts& counts) : transform_(counts.transform) {
  if (!counts.missing.empty()) {
    std::string msg = std::to_string(counts.missing.size()) + " correctly classified video(s) lack a " +
                      std::string(to_string(counts.transform)) + " prediction:";
    for (std::size_t i = 0; i < counts.missing.size() && i < kMaxMissingInMessage; ++i) {
      msg += " " + counts.missing[i];
    }
    if (counts.missing.size() > kMaxMissingInMessage) msg += " ...";
    throw Error(ErrorKind::kIncompleteLog, msg);
  }
  rows_.resize(counts.class_count());
  for (std::size_t y = 0; y < counts.class_count(); ++y) {
    if (counts.correct[y] == 0) continue;
    const double denom = static_cast<double>(counts.correct[y]);
    for (const auto& [to, n] : counts.transfer[y]) rows_[y][to] = static_cast<double>(n) / denom;
  }
}

double TransferMatrix::operator()(ClassId from, ClassId to) const {
  if (from >= rows_.size()) return 0.0;
  const auto& r = rows_[from];
  auto it = r.find(to);
  return it == r.end() ? 0.0 : it->second;
}

TransferMatrix transfer_matrix(const PredictionLog& log, const DatasetManifest& manifest, TransformId transform,
                               unsigned jobs) {
  return TransferMatrix(count_predictions(log, manifest, transform, jobs));
}

double affinity(const TransferMatrix& gamma, ClassId y, ClassId y_prime) {
  return gamma(y, y_prime) * gamma(y_prime, y);
}

DiscoveryReport extract_transform(const DiscoveryCounts& counts, const DiscoveryConfig& cfg) {
  cfg.validate();
  const TransferMatrix gamma(counts);
  const std::size_t n = counts.class_count();

  DiscoveryReport report;
  report.transform = counts.transform;
  report.config = cfg;
  report.map.transform = counts.transform;
  report.classes.resize(n);

  for (ClassId y = 0; y < n; ++y) {
    ClassDiagnostics& d = report.classes[y];
    d.class_id = y;
    d.videos = counts.videos[y];
    d.correct = counts.correct[y];
    d.recall = class_recall(counts, y);
    d.established = d.recall >= cfg.lambda;
    d.omega_self = affinity(gamma, y, y);
    // Omega(y, y') can only be non-zero where Gamma(y, y') is.
    for (const auto& [to, g] : gamma.row(y)) {
      const double omega = affinity(gamma, y, to);
      if (omega > 0.0) d.omega_row[to] = omega;
      if (to == y || omega <= 0.0) continue;
      if (omega_candidate_better(omega, to, d.omega_candidate, d.candidate)) {
        d.candidate = to;
        d.omega_candidate = omega;
      }
    }

    if (!d.established) {
      d.entry = ClassEntry::novel();
    } else if (d.omega_self >= cfg.alpha) {
      d.entry = ClassEntry::invariant();
    } else if (d.candidate && d.omega_candidate >= cfg.alpha && affinity(gamma, *d.candidate, *d.candidate) < cfg.alpha) {
      d.entry = ClassEntry::equivariant(*d.candidate);
    } else {
      d.entry = ClassEntry::novel();
    }
  }

  // Mutual consistency: y -> y_t must be answered by y_t -> y.
  for (bool changed = true; changed;) {
    changed = false;
    // Targets are captured before any demotion in this round.
    std::vector<std::pair<ClassId, ClassId>> broken;
    for (const auto& d : report.classes) {
      if (d.entry.kind != EntryKind::kEquivariant) continue;
      const ClassEntry& back = report.classes[d.entry.target].entry;
      if (back.kind != EntryKind::kEquivariant || back.target != d.class_id) {
        broken.emplace_back(d.class_id, d.entry.target);
      }
    }
    for (const auto& [y, target] : broken) {
      for (ClassId id : {y, target}) {
        auto& d = report.classes[id];
        if (d.entry.kind != EntryKind::kEquivariant) continue;
        d.entry = ClassEntry::novel();
        d.conflict = true;
        changed = true;
      }
    }
  }

  for (const auto& d : report.classes) report.map.entries.emplace(d.class_id, d.entry);
  return report;
}

DiscoveryReport extract_transform(const PredictionLog& log, const DatasetManifest& manifest, TransformId transform,
                                  const DiscoveryConfig& cfg, unsigned jobs) {
  cfg.validate();
  return extract_transform(count_predictions(log, manifest, transform, jobs), cfg);
}

nlohmann::ordered_json to_json(const DiscoveryReport& report) {
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const auto& d : report.classes) {
    nlohmann::ordered_json flags = nlohmann::ordered_json::array();
    if (!d.established) flags.push_back("not_established");
    if (d.conflict) flags.push_back("conflict");
    nlohmann::ordered_json row = nlohmann::ordered_json::object();
    for (const auto& [to, omega] : d.omega_row) row[std::to_string(to)] = omega;
    classes.push_back({
        {"class_id", d.class_id},
        {"videos", d.videos},
        {"correct", d.correct},
        {"lambda_value", d.recall},
        {"established", d.established},
        {"omega_self", d.omega_self},
        {"candidate_target", d.candidate ? nlohmann::ordered_json(*d.candidate) : nlohmann::ordered_json(nullptr)},
        {"omega_target", d.omega_candidate},
        {"omega_row", std::move(row)},
        {"entry", to_string(d.entry.kind)},
        {"flags", std::move(flags)},
    });
  }
  return {
      {"transform", to_string(report.transform)},
      {"lambda", report.config.lambda},
      {"alpha", report.config.alpha},
      {"map", to_json(report.map)},
      {"classes", std::move(classes)},
  };
}

ScoreCounts score_against_ground_truth(const ClassTransformMap& discovered, const ClassTransformMap& truth) {
  const bool same_universe =
      discovered.entries.size() == truth.entries.size() &&
      std::equal(discovered.entries.begin(), discovered.entries.end(), truth.entries.begin(),
                 [](const auto& a, const auto& b) { return a.first == b.first; });
  if (!same_universe) {
    throw Error(ErrorKind::kValidation, "discovered and ground-truth maps cover different classes (" +
                                            std::to_string(discovered.entries.size()) + " vs " +
                                            std::to_string(truth.entries.size()) + ")");
  }
  ScoreCounts s;
  for (const auto& [id, want] : truth.entries) {
    const ClassEntry& got = discovered.entries.at(id);
    if (want.has_mapping()) {
      if (!got.has_mapping()) {
        ++s.fn;
      } else if (got.kind == want.kind && (got.kind == EntryKind::kInvariant || got.target == want.target)) {
        ++s.tp;
      } else {
        ++s.fp;
      }
    } else if (got.has_mapping()) {
      ++s.fp;
    } else {
      ++s.tn;
    }
  }
  return s;
}

SweepResult sweep(const DiscoveryCounts& counts, const ClassTransformMap& truth, std::span<const double> lambdas,
                  std::span<const double> alphas) {
  if (lambdas.empty() || alphas.empty()) throw Error(ErrorKind::kConfig, "sweep grids must not be empty");
  SweepResult result;
  result.table.reserve(lambdas.size() * alphas.size());
  bool have_best = false;
  for (double lambda : lambdas) {
    for (double alpha : alphas) {
      const DiscoveryConfig cfg{lambda, alpha};
      const auto report = extract_transform(counts, cfg);
      SweepPoint point{lambda, alpha, score_against_ground_truth(report.map, truth)};
      result.table.push_back(point);
      const auto& b = result.best;
      const bool better = !have_best || point.counts.tp > b.counts.tp ||
                          (point.counts.tp == b.counts.tp &&
                           (point.counts.tn > b.counts.tn ||
                            (point.counts.tn == b.counts.tn &&
                             (point.lambda < b.lambda || (point.lambda == b.lambda && point.alpha < b.alpha)))));
      if (better) {
        result.best = point;
        have_best = true;
      }
    }
  }
  return result;
}

namespace {

double parse_number(std::string_view text, std::string_view range) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw Error(ErrorKind::kConfig, "bad number '" + std::string(text) + "' in grid '" + std::string(range) + "'");
  }
  return value;
}

}  // namespace

std::vector<double> parse_grid(std::string_view range) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = range.find(':', start);
    parts.push_back(range.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() == 1) return {parse_number(parts[0], range)};
  if (parts.size() != 3) throw Error(ErrorKind::kConfig, "grid '" + std::string(range) + "' is not start:stop:step");

  const double first = parse_number(parts[0], range);
  const double last = parse_number(parts[1], range);
  const double step = parse_number(parts[2], range);
  if (step <= 0.0 || last < first) {
    throw Error(ErrorKind::kConfig, "grid '" + std::string(range) + "' needs step > 0 and stop >= start");
  }
  // Points are start + i*step, capped at stop.
  const auto steps = static_cast<std::size_t>(std::floor((last - first) / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) grid.push_back(std::min(first + static_cast<double>(i) * step, last));
  return grid;
}

}  // namespace retro
