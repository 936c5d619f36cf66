// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>

#include "retro/manifest.hpp"
#include "retro/transform_map.hpp"

using namespace retro;

namespace {

const std::filesystem::path kData = RETRO_DATA_DIR;

void check_fixture(const char* map_file, const char* classes_file, TransformId transform, CategoryCounts expected) {
  CAPTURE(map_file);
  const auto map = load_transform_map(kData / "ground_truth" / map_file);
  const auto names = load_class_names(kData / "ground_truth" / classes_file);
  CHECK(map.transform == transform);
  CHECK(map.entries.size() == names.size());
  CHECK(category_counts(map) == expected);

  std::vector<VideoRecord> none;
  const DatasetManifest universe(none, names);
  CHECK(validate_transform_map(map, universe).empty());
}

}  // namespace

TEST_CASE("shipped ground-truth maps") {
  check_fixture("jester_tr.json", "jester.classes.json", TransformId::kTR, {8, 14, 5, 0});
  check_fixture("jester_hf.json", "jester.classes.json", TransformId::kHF, {21, 6, 0, 0});
  check_fixture("something_tr.json", "something.classes.json", TransformId::kTR, {34, 32, 28, 80});
  check_fixture("something_hf.json", "something.classes.json", TransformId::kHF, {168, 6, 0, 0});
}

TEST_CASE("empty map counts nothing") {
  CHECK(category_counts(ClassTransformMap{}) == CategoryCounts{});
}
