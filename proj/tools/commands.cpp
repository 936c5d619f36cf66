// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "retro/discovery.hpp"
#include "retro/error.hpp"
#include "retro/manifest.hpp"
#include "retro/metrics.hpp"
#include "retro/perception.hpp"
#include "retro/prediction_log.hpp"
#include "retro/rten.hpp"
#include "retro/synthesis.hpp"
#include "retro/tensor.hpp"
#include "retro/transform_map.hpp"

namespace retro::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

DatasetManifest load(const ManifestArgs& args) { return load_manifest(args.manifest, args.classes); }

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::kIo, "failed writing '" + path.string() + "'");
}

void write_json_file(const fs::path& path, const ordered_json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct FileJob {
  fs::path input;
  fs::path output;
  std::string label;  // reported name
};

struct FileResult {
  bool ok = false;
  std::string error;
  std::uintmax_t bytes_in = 0;
  std::uintmax_t bytes_out = 0;
};

// Runs `work` over every job on up to `jobs` threads. Results are indexed
// like `files` and independent of scheduling.
template <typename Work>
std::vector<FileResult> run_file_jobs(const std::vector<FileJob>& files, unsigned jobs, Work work) {
  std::vector<FileResult> results(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      FileResult& r = results[i];
      try {
        r.bytes_in = fs::file_size(files[i].input);
        rten::write_file(files[i].output, work(rten::read_file(files[i].input), i));
        r.bytes_out = fs::file_size(files[i].output);
        r.ok = true;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  const unsigned threads = std::clamp<unsigned>(jobs, 1, static_cast<unsigned>(std::max<std::size_t>(files.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

int report_file_jobs(const std::string& command, const std::vector<FileJob>& files,
                     const std::vector<FileResult>& results, std::chrono::steady_clock::time_point started,
                     const std::optional<fs::path>& summary_path, ordered_json summary) {
  std::uintmax_t bytes_in = 0;
  std::uintmax_t bytes_out = 0;
  std::size_t succeeded = 0;
  ordered_json failed = ordered_json::array();
  for (std::size_t i = 0; i < files.size(); ++i) {
    bytes_in += results[i].bytes_in;
    bytes_out += results[i].bytes_out;
    if (results[i].ok) {
      ++succeeded;
    } else {
      failed.push_back({{"file", files[i].label}, {"error", results[i].error}});
      spdlog::error("{}: {}", files[i].label, results[i].error);
    }
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
  summary["command"] = command;
  summary["files"] = files.size();
  summary["succeeded"] = succeeded;
  summary["failed"] = std::move(failed);
  summary["bytes_in"] = bytes_in;
  summary["bytes_out"] = bytes_out;
  summary["wall_time_s"] = elapsed.count();
  std::cout << summary.dump(2) << '\n';
  if (summary_path) write_json_file(*summary_path, summary);
  return succeeded == files.size() ? 0 : 1;
}

void require_dir(const fs::path& dir, std::string_view what) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::kIo, std::string(what) + " '" + dir.string() + "' is not a directory");
}

}  // namespace

int run_transform(const TransformArgs& args) {
  const auto started = std::chrono::steady_clock::now();
  const TransformId op = parse_transform_id(args.op);
  const std::optional<Layout> layout = args.layout ? std::optional(parse_layout(*args.layout)) : std::nullopt;
  require_dir(args.in_dir, "input directory");
  fs::create_directories(args.out_dir);

  std::vector<FileJob> files;
  for (const auto& entry : fs::directory_iterator(args.in_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".rten") {
      files.push_back({entry.path(), args.out_dir / entry.path().filename(), entry.path().filename().string()});
    }
  }
  std::sort(files.begin(), files.end(), [](const FileJob& a, const FileJob& b) { return a.label < b.label; });
  spdlog::info("transform {}: {} file(s) from {}", to_string(op), files.size(), args.in_dir.string());

  const auto results = run_file_jobs(files, args.jobs, [&](const FrameTensor& v, std::size_t) {
    auto out = apply_transform(v, op);
    return layout ? convert_layout(out, *layout) : out;
  });
  ordered_json summary = {{"op", to_string(op)}};
  if (layout) summary["layout"] = to_string(*layout);
  return report_file_jobs("transform", files, results, started, args.summary, std::move(summary));
}

int run_discover(const DiscoverArgs& args) {
  const auto manifest = load(args.manifest);
  const auto log = load_prediction_log(args.predictions);
  const TransformId transform = parse_transform_id(args.transform);
  const DiscoveryConfig cfg{args.lambda, args.alpha};
  cfg.validate();

  const auto report = extract_transform(log, manifest, transform, cfg, args.jobs);
  write_json_file(args.out, to_json(report));
  const auto c = category_counts(report.map);
  spdlog::info("discovered {} map: {} invariant, {} equivariant, {} novel", to_string(transform), c.invariant,
               c.equivariant, c.novel_realistic + c.novel_unrealistic);
  return 0;
}

int run_sweep(const SweepArgs& args) {
  const auto manifest = load(args.manifest);
  const auto log = load_prediction_log(args.predictions);
  const TransformId transform = parse_transform_id(args.transform);
  const auto truth = load_transform_map(args.truth);
  if (truth.transform != transform) {
    throw Error(ErrorKind::kConfig, "ground truth is for " + std::string(to_string(truth.transform)) + ", not " +
                                        std::string(to_string(transform)));
  }
  const auto lambdas = parse_grid(args.lambda_grid);
  const auto alphas = parse_grid(args.alpha_grid);

  const auto counts = count_predictions(log, manifest, transform, args.jobs);
  const auto result = sweep(counts, truth, lambdas, alphas);
  const auto& b = result.best;
  const auto report = extract_transform(counts, DiscoveryConfig{b.lambda, b.alpha});

  ordered_json out = {
      {"transform", to_string(transform)},
      {"grid_points", result.table.size()},
      {"best",
       {{"lambda", b.lambda}, {"alpha", b.alpha}, {"tp", b.counts.tp}, {"fp", b.counts.fp}, {"fn", b.counts.fn},
        {"tn", b.counts.tn}}},
      {"report", to_json(report)},
  };
  write_json_file(args.out, out);

  if (args.table) {
    auto csv = open_output(*args.table);
    csv << "lambda,alpha,tp,fp,fn,tn\n";
    for (const auto& p : result.table) {
      csv << format_double(p.lambda) << ',' << format_double(p.alpha) << ',' << p.counts.tp << ',' << p.counts.fp
          << ',' << p.counts.fn << ',' << p.counts.tn << '\n';
    }
    finish(csv, *args.table);
  }
  spdlog::info("best of {} grid points: lambda={} alpha={} TP={} FP={} FN={} TN={}", result.table.size(),
               format_double(b.lambda), format_double(b.alpha), b.counts.tp, b.counts.fp, b.counts.fn, b.counts.tn);
  return 0;
}

int run_augment(const AugmentArgs& args) {
  const auto manifest = load(args.manifest);
  const auto map = load_transform_map(args.map);
  const auto examples = build_augmented(manifest, map);
  auto out = open_output(args.out);
  write_synthetic_manifest(out, examples);
  finish(out, args.out);
  spdlog::info("wrote {} augmentation example(s) to {}", examples.size(), args.out.string());
  return 0;
}

int run_zeroshot(const ZeroShotArgs& args) {
  const auto manifest = load(args.manifest);
  const auto map = load_transform_map(args.map);
  const TransformId transform = args.transform ? parse_transform_id(*args.transform) : map.transform;
  const auto split = build_zero_shot_subset(manifest, map, transform);

  fs::create_directories(args.out_dir);
  const auto manifest_path = args.out_dir / "manifest.jsonl";
  {
    auto out = open_output(manifest_path);
    write_manifest_records(out, split.retained);
    finish(out, manifest_path);
  }
  write_json_file(sidecar_class_names_path(manifest_path), ordered_json(manifest.class_names()));
  const auto synthetic_path = args.out_dir / "synthetic.jsonl";
  {
    auto out = open_output(synthetic_path);
    write_synthetic_manifest(out, split.synthesized);
    finish(out, synthetic_path);
  }

  ordered_json pairs = ordered_json::array();
  for (const auto& p : split.pairs) {
    pairs.push_back({{"many_shot", p.many_shot},
                     {"zero_shot", p.zero_shot},
                     {"many_shot_train", p.many_shot_train},
                     {"zero_shot_train_removed", p.zero_shot_train_removed}});
  }
  write_json_file(args.out_dir / "split.json",
                  {{"transform", to_string(transform)},
                   {"many_shot_classes", split.many_shot_classes},
                   {"zero_shot_classes", split.zero_shot_classes},
                   {"synthesized", split.synthesized.size()},
                   {"pairs", std::move(pairs)}});
  spdlog::info("{} zero-shot class(es), {} synthesized example(s)", split.zero_shot_classes.size(),
               split.synthesized.size());
  return 0;
}

int run_sample(const SampleArgs& args) {
  const auto manifest = load(args.manifest);
  std::vector<ClassTransformMap> maps;
  for (const auto& path : args.maps) {
    maps.push_back(load_transform_map(path));
    require_valid(maps.back(), manifest);
  }
  const auto split = try_parse_split(args.split);
  if (!split) throw Error(ErrorKind::kConfig, "unknown split '" + args.split + "'");

  AugmentationSampler sampler(std::move(maps), args.p, args.seed);
  auto out = open_output(args.out);
  std::size_t transformed = 0;
  std::size_t total = 0;
  for (const auto& r : manifest.records()) {
    if (r.split != *split) continue;
    const auto s = sampler.sample(r);
    ordered_json transforms = ordered_json::array();
    for (TransformId t : s.applied) transforms.push_back(to_string(t));
    ordered_json line = {{"video_id", s.video_id}, {"source", r.video_id}, {"transforms", std::move(transforms)},
                         {"class_id", s.label}};
    out << line.dump() << '\n';
    ++total;
    if (!s.applied.empty()) ++transformed;
  }
  finish(out, args.out);
  spdlog::info("sampled {} example(s), {} transformed (seed {})", total, transformed, args.seed);
  return 0;
}

int run_materialize(const MaterializeArgs& args) {
  const auto started = std::chrono::steady_clock::now();
  const auto examples = load_synthetic_manifest(args.synthetic);
  require_dir(args.src_dir, "source directory");
  fs::create_directories(args.out_dir);

  std::vector<FileJob> files;
  files.reserve(examples.size());
  for (const auto& e : examples) {
    files.push_back({args.src_dir / (e.source_video_id + ".rten"), args.out_dir / (e.video_id + ".rten"), e.video_id});
  }
  const auto results = run_file_jobs(files, args.jobs, [&](const FrameTensor& v, std::size_t i) {
    return apply_transform(v, examples[i].transform);
  });
  return report_file_jobs("materialize", files, results, started, args.summary, ordered_json::object());
}

int run_eval(const EvalArgs& args) {
  const auto manifest = load(args.manifest);
  const auto log = load_prediction_log(args.predictions);

  EvalOptions opts;
  if (args.variant == "transformed") {
    if (!args.transform) throw Error(ErrorKind::kConfig, "--variant transformed needs --transform");
    opts.source = PredictionSource::transformed(parse_transform_id(*args.transform));
  } else if (args.variant != "original") {
    throw Error(ErrorKind::kConfig, "unknown variant '" + args.variant + "' (expected original or transformed)");
  }
  if (args.split) {
    opts.split = try_parse_split(*args.split);
    if (!opts.split) throw Error(ErrorKind::kConfig, "unknown split '" + *args.split + "'");
  }

  std::optional<ClassTransformMap> map;
  if (args.map) {
    map = load_transform_map(*args.map);
    require_valid(*map, manifest);
  }
  if (args.apply_lt && !map) throw Error(ErrorKind::kConfig, "--apply-lt needs --map");
  if (args.apply_lt) opts.label_map = &*map;

  std::vector<std::size_t> ks;
  {
    std::string_view rest = args.topk;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto field = rest.substr(0, comma);
      std::size_t k = 0;
      for (char ch : field) {
        if (ch < '0' || ch > '9') throw Error(ErrorKind::kConfig, "bad --topk '" + args.topk + "'");
        k = k * 10 + static_cast<std::size_t>(ch - '0');
      }
      if (field.empty() || k == 0) throw Error(ErrorKind::kConfig, "bad --topk '" + args.topk + "'");
      ks.push_back(k);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (ks.empty()) throw Error(ErrorKind::kConfig, "--topk needs at least one k");
  }

  std::vector<ClassGroup> groups;
  if (args.groups) {
    groups = load_class_groups(*args.groups);
  } else {
    ClassGroup all{"all", {}};
    for (ClassId id = 0; id < manifest.class_count(); ++id) all.classes.insert(id);
    groups.push_back(std::move(all));
  }

  const auto rows = breakdown(log, manifest, groups, ks, opts);
  if (args.out) {
    auto out = open_output(*args.out);
    write_breakdown_csv(out, rows, ks);
    finish(out, *args.out);
  } else {
    write_breakdown_csv(std::cout, rows, ks);
  }

  if (args.confusion_csv || args.heatmap) {
    EvalOptions cm_opts = opts;
    cm_opts.label_map = nullptr;
    const auto cm = confusion(log, manifest, map ? &*map : nullptr, args.apply_lt, cm_opts);
    if (args.confusion_csv) {
      auto out = open_output(*args.confusion_csv);
      write_confusion_csv(out, cm);
      finish(out, *args.confusion_csv);
    }
    if (args.heatmap) write_confusion_pgm(*args.heatmap, cm);
    spdlog::info("confusion matrix: {} example(s), {} excluded without a label under the map", cm.total(),
                 cm.excluded);
  }
  return 0;
}

int run_perception(const PerceptionArgs& args) {
  if (!args.tally && !args.qc) throw Error(ErrorKind::kConfig, "perception needs --tally and/or --qc");
  std::vector<perception::ClassTally> tallies;
  if (args.tally) tallies = perception::load_tallies(*args.tally);
  if (args.qc) {
    if (!args.k || !args.min_correct) throw Error(ErrorKind::kConfig, "--qc needs --k and --min-correct");
    const auto submissions = perception::load_submissions(*args.qc);
    const auto accepted = perception::qc_filter(submissions, *args.k, *args.min_correct);
    spdlog::info("quality control: accepted {} of {} submission(s) ({}/{} catch trials required)", accepted.size(),
                 submissions.size(), *args.min_correct, *args.k);
    tallies = perception::merge_tallies(std::move(tallies), perception::tally_choices(accepted));
  }
  if (args.out) {
    auto out = open_output(*args.out);
    perception::write_report_csv(out, tallies);
    finish(out, *args.out);
  } else {
    perception::write_report_csv(std::cout, tallies);
  }
  return 0;
}

}  // namespace retro::cli
