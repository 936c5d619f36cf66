// SPDX-License-Identifier: Apache-2.0
//
// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria, capped at 1.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "../support/oracle.hpp"
#include "../support/synthetic.hpp"
#include "retro/discovery.hpp"
#include "retro/metrics.hpp"
#include "retro/perception.hpp"
#include "retro/synthesis.hpp"
#include "retro/tensor.hpp"
#include "retro/transform_map.hpp"

using namespace retro;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and budgets.
constexpr double kInversionBudgetS = 1.0;
constexpr double kDiscoveryBudgetS = 5.0;
constexpr double kStochasticTol = 1e-12;
constexpr double kBoundsTol = 1e-3;
constexpr double kSamplerTol = 0.015;
constexpr std::size_t kTensorCorpus = 100;
constexpr std::size_t kDiscoveryInstances = 60;
constexpr std::size_t kSamplerDraws = 10000;
constexpr std::uint64_t kSeed = 20190617;

const Dims kMaxDims{8, 4, 16, 16};
constexpr TransformId kAllTransforms[] = {TransformId::kHF, TransformId::kTR, TransformId::kHFTR};

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<FrameTensor> tensor_corpus() {
  std::mt19937_64 rng(kSeed);
  std::vector<FrameTensor> out;
  for (std::size_t i = 0; i < kTensorCorpus; ++i) {
    const DType dtype = i % 2 ? DType::kF32 : DType::kU8;
    const Layout layout = (i / 2) % 2 ? Layout::kCTHW : Layout::kTCHW;
    out.push_back(testing::random_tensor(rng, kMaxDims, dtype, layout));
  }
  return out;
}

// Element bytes of logical (t, c, h, w), computed from strides here rather
// than through FrameTensor::offset.
std::span<const std::uint8_t> element(const FrameTensor& v, std::uint32_t t, std::uint32_t c, std::uint32_t h,
                                      std::uint32_t w) {
  const auto& d = v.dims();
  const std::size_t plane = static_cast<std::size_t>(d.height) * d.width;
  const std::size_t index = v.layout() == Layout::kTCHW
                                ? (static_cast<std::size_t>(t) * d.channels + c) * plane + h * d.width + w
                                : (static_cast<std::size_t>(c) * d.frames + t) * plane + h * d.width + w;
  const std::size_t size = element_size(v.dtype());
  return v.bytes().subspan(index * size, size);
}

bool same_element(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

// out(t, c, h, w) == in(src(t, c, h, w)) for every logical index.
template <typename Source>
bool matches_index_oracle(const FrameTensor& in, const FrameTensor& out, Source src) {
  const auto& d = in.dims();
  if (!(out.dims() == d)) return false;
  for (std::uint32_t t = 0; t < d.frames; ++t)
    for (std::uint32_t c = 0; c < d.channels; ++c)
      for (std::uint32_t h = 0; h < d.height; ++h)
        for (std::uint32_t w = 0; w < d.width; ++w) {
          const auto [st, sc, sh, sw] = src(t, c, h, w);
          if (!same_element(element(out, t, c, h, w), element(in, st, sc, sh, sw))) return false;
        }
  return true;
}

Outcome self_inversion() {
  const auto corpus = tensor_corpus();
  const auto start = Clock::now();
  std::size_t failures = 0;
  for (const auto& v : corpus) {
    for (TransformId t : kAllTransforms) failures += !(apply_transform(apply_transform(v, t), t) == v);
  }
  const double elapsed = seconds_since(start);

  std::size_t oracle_failures = 0;
  for (const auto& v : corpus) {
    const auto T = v.dims().frames;
    const auto W = v.dims().width;
    oracle_failures += !matches_index_oracle(v, time_reverse(v), [&](auto t, auto c, auto h, auto w) {
      return std::array<std::uint32_t, 4>{T - 1 - t, c, h, w};
    });
    oracle_failures += !matches_index_oracle(v, horizontal_flip(v), [&](auto t, auto c, auto h, auto w) {
      return std::array<std::uint32_t, 4>{t, c, h, W - 1 - w};
    });
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu tensors x 3 transforms, %zu mismatches, %zu index-oracle mismatches, %.3fs < %.1fs",
                corpus.size(), failures, oracle_failures, elapsed, kInversionBudgetS);
  return {failures == 0 && oracle_failures == 0 && elapsed < kInversionBudgetS, buf};
}

Outcome commutativity_and_layout() {
  std::size_t failures = 0;
  for (const auto& v : tensor_corpus()) {
    failures += !(horizontal_flip(time_reverse(v)) == time_reverse(horizontal_flip(v)));
    for (Layout target : {Layout::kTCHW, Layout::kCTHW}) {
      for (TransformId t : kAllTransforms) {
        failures += !(convert_layout(apply_transform(v, t), target) == apply_transform(convert_layout(v, target), t));
      }
    }
  }
  return {failures == 0, std::to_string(kTensorCorpus) + " tensors, " + std::to_string(failures) + " mismatches"};
}

Outcome misinterpretation() {
  const std::vector<std::uint8_t> rgb{'R', 'r', 'G', 'g', 'B', 'b'};  // R0 R1 G0 G1 B0 B1
  const auto misread = misinterpret_layout(FrameTensor::from_u8({2, 3, 1, 1}, Layout::kCTHW, rgb), Layout::kTCHW);
  std::string frame0;
  std::string frame1;
  for (std::uint32_t c = 0; c < 3; ++c) {
    frame0 += static_cast<char>(misread.u8_at(0, c, 0, 0));
    frame1 += static_cast<char>(misread.u8_at(1, c, 0, 0));
  }
  const bool pattern = frame0 == "RrG" && frame1 == "gBb";

  // The misread tensor's (t, c, h, w) is the flat TCHW position decoded as CTHW.
  std::size_t failures = 0;
  for (const auto& v : tensor_corpus()) {
    if (v.layout() != Layout::kCTHW) continue;
    const auto d = v.dims();
    failures += !matches_index_oracle(v, misinterpret_layout(v, Layout::kTCHW), [&](auto t, auto c, auto h, auto w) {
      const std::size_t flat = ((static_cast<std::size_t>(t) * d.channels + c) * d.height + h) * d.width + w;
      const auto sw = static_cast<std::uint32_t>(flat % d.width);
      const auto sh = static_cast<std::uint32_t>(flat / d.width % d.height);
      const auto st = static_cast<std::uint32_t>(flat / (static_cast<std::size_t>(d.width) * d.height) % d.frames);
      const auto sc = static_cast<std::uint32_t>(flat / (static_cast<std::size_t>(d.width) * d.height * d.frames));
      return std::array<std::uint32_t, 4>{st, sc, sh, sw};
    });
  }
  return {pattern && failures == 0,
          "frames [" + frame0 + "] [" + frame1 + "], " + std::to_string(failures) + " random index-oracle mismatches"};
}

std::vector<testing::PlantedInstance> discovery_instances() {
  std::mt19937_64 rng(kSeed + 1);
  std::vector<testing::PlantedInstance> out;
  for (std::size_t i = 0; i < kDiscoveryInstances; ++i) {
    testing::InstanceShape shape;
    shape.noise = 0.05 * static_cast<double>(i % 5);  // 0%, 5%, ..., 20%
    shape.transform = kAllTransforms[i % 3];
    out.push_back(testing::make_planted_instance(rng, shape));
  }
  return out;
}

Outcome discovery_equivalence() {
  const auto instances = discovery_instances();
  const std::pair<double, double> configs[] = {{0.9, 0.5}, {0.9, 0.8}, {0.7, 0.4}, {0.5, 0.25}, {0.0, 0.0}};
  const auto start = Clock::now();
  std::size_t compared = 0;
  std::size_t mismatches = 0;
  std::size_t clean = 0;
  std::size_t recovered = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const TransformId t = inst.planted.transform;
    for (const auto& [lambda, alpha] : configs) {
      const auto report = extract_transform(inst.log, inst.manifest, t, {lambda, alpha});
      const auto oracle = testing::oracle_discover(inst.log, inst.manifest, t, lambda, alpha);
      ++compared;
      bool same = oracle && report.map == oracle->map;
      for (ClassId y = 0; same && y < inst.manifest.class_count(); ++y) {
        const auto& d = report.classes[y];
        same = d.candidate == oracle->candidate[y] && d.established == oracle->established[y] &&
               d.conflict == oracle->conflict[y] && d.recall == oracle->recall[y] &&
               d.omega_self == oracle->omega[y][y];
      }
      mismatches += !same;
    }
    if (i % 5 == 0) {
      ++clean;
      recovered += extract_transform(inst.log, inst.manifest, t, {0.9, 0.5}).map == inst.planted;
    }
  }
  const double elapsed = seconds_since(start);
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "%zu instances x %zu configs, %zu mismatches; noise-free recovery %zu/%zu; %.3fs < %.1fs",
                instances.size(), std::size(configs), mismatches, recovered, clean, elapsed, kDiscoveryBudgetS);
  return {compared >= 50 && mismatches == 0 && recovered == clean && elapsed < kDiscoveryBudgetS, buf};
}

Outcome affinity_and_transfer() {
  double worst_symmetry = 0.0;
  double worst_row = 0.0;
  std::size_t rows = 0;
  for (const auto& inst : discovery_instances()) {
    const auto counts = count_predictions(inst.log, inst.manifest, inst.planted.transform);
    const TransferMatrix gamma(counts);
    const auto n = static_cast<ClassId>(counts.class_count());
    for (ClassId y = 0; y < n; ++y) {
      for (ClassId z = 0; z < n; ++z) {
        worst_symmetry = std::max(worst_symmetry, std::abs(affinity(gamma, y, z) - affinity(gamma, z, y)));
      }
      if (counts.correct[y] == 0) continue;
      double sum = 0.0;
      for (const auto& [to, g] : gamma.row(y)) sum += g;
      worst_row = std::max(worst_row, std::abs(sum - 1.0));
      ++rows;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "max |Omega(y,y')-Omega(y',y)| = %.3g, max |row sum - 1| = %.3g over %zu rows",
                worst_symmetry, worst_row, rows);
  return {worst_symmetry <= kStochasticTol && worst_row <= kStochasticTol, buf};
}

Outcome perception_bounds() {
  const auto [lo200, hi200] = perception::reversibility_bounds(200);
  const auto [lo120, hi120] = perception::reversibility_bounds(120);
  const bool ok = std::abs(lo200 - 0.3939) <= kBoundsTol && std::abs(hi200 - 0.6061) <= kBoundsTol &&
                  std::abs(lo120 - 0.3631) <= kBoundsTol && std::abs(hi120 - 0.6369) <= kBoundsTol;
  char buf[160];
  std::snprintf(buf, sizeof buf, "n=200 -> (%.4f, %.4f), n=120 -> (%.4f, %.4f), tol %.0e", lo200, hi200, lo120, hi120,
                kBoundsTol);
  return {ok, buf};
}

Outcome synthesis_invariants() {
  std::mt19937_64 rng(kSeed + 2);
  std::size_t splits = 0;
  std::size_t pairs = 0;
  std::size_t failures = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t classes = 2 + rng() % 19;
    const auto manifest = testing::random_manifest(rng, classes, 1, 50);
    auto map = testing::random_map(rng, classes, TransformId::kTR);
    if (equivariant_pairs(map).empty()) {
      map.entries[0] = ClassEntry::equivariant(1);
      map.entries[1] = ClassEntry::equivariant(0);
    }
    const auto split = build_zero_shot_subset(manifest, map, TransformId::kTR);
    ++splits;
    for (const auto& p : split.pairs) {
      ++pairs;
      std::size_t retained_zero_train = 0;
      for (const auto& r : split.retained) retained_zero_train += r.class_id == p.zero_shot && r.split == Split::kTrain;
      std::size_t synthesized = 0;
      for (const auto& e : split.synthesized) synthesized += e.class_id == p.zero_shot;
      failures += retained_zero_train != 0;
      failures += synthesized != manifest.count(p.many_shot, Split::kTrain);
    }

    const auto augmented = build_augmented(manifest, map);
    for (const auto& [a, b] : equivariant_pairs(map)) {
      std::size_t support_a = manifest.count(a, Split::kTrain);
      std::size_t support_b = manifest.count(b, Split::kTrain);
      for (const auto& e : augmented) {
        support_a += e.class_id == a;
        support_b += e.class_id == b;
      }
      failures += support_a != support_b;
    }
  }
  return {failures == 0, std::to_string(splits) + " manifests, " + std::to_string(pairs) + " zero-shot pairs, " +
                             std::to_string(failures) + " violations"};
}

Outcome sampler_statistics() {
  const ClassTransformMap map{TransformId::kTR, {{0, ClassEntry::equivariant(1)}, {1, ClassEntry::equivariant(0)}}};
  const VideoRecord record{"clip", 0, Split::kTrain};
  AugmentationSampler a({map}, 0.5, kSeed);
  AugmentationSampler b({map}, 0.5, kSeed);
  std::size_t fired = 0;
  std::size_t diverged = 0;
  std::size_t label_errors = 0;
  for (std::size_t i = 0; i < kSamplerDraws; ++i) {
    const auto sa = a.sample(record);
    const auto sb = b.sample(record);
    diverged += sa.applied != sb.applied || sa.label != sb.label;
    fired += !sa.applied.empty();
    label_errors += sa.label != (sa.applied.empty() ? 0u : 1u);
  }
  const double fraction = static_cast<double>(fired) / static_cast<double>(kSamplerDraws);
  char buf[160];
  std::snprintf(buf, sizeof buf, "transformed fraction %.4f (0.5 +/- %.3f), %zu seed divergences, %zu label errors",
                fraction, kSamplerTol, diverged, label_errors);
  return {std::abs(fraction - 0.5) <= kSamplerTol && diverged == 0 && label_errors == 0, buf};
}

Outcome metrics_properties() {
  std::mt19937_64 rng(kSeed + 3);
  std::size_t logs = 0;
  std::size_t failures = 0;
  std::size_t swaps = 0;
  for (int i = 0; i < 30; ++i) {
    testing::InstanceShape shape;
    shape.noise = i % 3 == 0 ? 0.0 : 0.3;
    const auto inst = testing::make_planted_instance(rng, shape);
    ++logs;
    double previous = 0.0;
    for (std::size_t k = 1; k <= inst.log.min_ranking_length(); ++k) {
      const double acc = topk_accuracy(inst.log, inst.manifest, k);
      failures += acc < previous;
      failures += acc != *testing::oracle_topk(inst.log, inst.manifest, k);
      previous = acc;
    }
    if (shape.noise == 0.0 && !equivariant_pairs(inst.planted).empty()) {
      ++swaps;
      const EvalOptions opts{PredictionSource::transformed(TransformId::kTR), std::nullopt, nullptr};
      const auto raw = confusion(inst.log, inst.manifest, &inst.planted, false, opts);
      const auto mapped = confusion(inst.log, inst.manifest, &inst.planted, true, opts);
      failures += raw.is_diagonal();
      failures += !mapped.is_diagonal();
    }
  }
  return {failures == 0 && swaps > 0, std::to_string(logs) + " random logs, " + std::to_string(swaps) +
                                          " planted swaps, " + std::to_string(failures) + " violations"};
}

Outcome jester_counts() {
  const std::filesystem::path dir = std::filesystem::path(RETRO_DATA_DIR) / "ground_truth";
  const auto tr = category_counts(load_transform_map(dir / "jester_tr.json"));
  const auto hf = category_counts(load_transform_map(dir / "jester_hf.json"));
  auto fmt = [](const CategoryCounts& c) {
    return "(" + std::to_string(c.invariant) + ", " + std::to_string(c.equivariant) + ", " +
           std::to_string(c.novel_realistic) + ", " + std::to_string(c.novel_unrealistic) + ")";
  };
  return {tr == CategoryCounts{8, 14, 5, 0} && hf == CategoryCounts{21, 6, 0, 0},
          "TR " + fmt(tr) + ", HF " + fmt(hf)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"self-inversion", self_inversion},
      {"commutativity-and-layout-invariance", commutativity_and_layout},
      {"layout-misinterpretation", misinterpretation},
      {"discovery-oracle-equivalence", discovery_equivalence},
      {"affinity-symmetry-and-transfer-rows", affinity_and_transfer},
      {"perception-bounds", perception_bounds},
      {"zero-shot-and-augmentation-invariants", synthesis_invariants},
      {"sampler-statistics", sampler_statistics},
      {"metrics-properties", metrics_properties},
      {"jester-category-counts", jester_counts},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
