// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "../support/helpers.hpp"
#include "../support/synthetic.hpp"
#include "retro/rten.hpp"
#include "retro/tensor.hpp"

using namespace retro;
using retro::testing::random_tensor;

namespace {

// 2 frames, 1 channel, 1 row, 3 columns; values encode (t, w) as 10*t + w.
FrameTensor small_clip() {
  const std::vector<std::uint8_t> v{0, 1, 2, 10, 11, 12};
  return FrameTensor::from_u8({2, 1, 1, 3}, Layout::kTCHW, v);
}

std::vector<std::uint8_t> as_vector(std::span<const std::uint8_t> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("time reverse swaps frames") {
  const auto r = time_reverse(small_clip());
  CHECK(as_vector(r.bytes()) == std::vector<std::uint8_t>{10, 11, 12, 0, 1, 2});
}

TEST_CASE("horizontal flip mirrors columns") {
  const auto f = horizontal_flip(small_clip());
  CHECK(as_vector(f.bytes()) == std::vector<std::uint8_t>{2, 1, 0, 12, 11, 10});
}

TEST_CASE("HFTR is flip then reverse") {
  const auto v = small_clip();
  CHECK(apply_transform(v, TransformId::kHFTR) == time_reverse(horizontal_flip(v)));
  CHECK(as_vector(apply_transform(v, TransformId::kHFTR).bytes()) == std::vector<std::uint8_t>{12, 11, 10, 2, 1, 0});
}

TEST_CASE("single frame and single column are fixed points") {
  const std::vector<std::uint8_t> v{7, 8, 9};
  const auto one_frame = FrameTensor::from_u8({1, 3, 1, 1}, Layout::kCTHW, v);
  CHECK(time_reverse(one_frame) == one_frame);
  CHECK(horizontal_flip(one_frame) == one_frame);
}

TEST_CASE("transforms are self-inverse on random tensors") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 40; ++i) {
    const auto dtype = i % 2 ? DType::kF32 : DType::kU8;
    const auto layout = (i / 2) % 2 ? Layout::kCTHW : Layout::kTCHW;
    const auto v = random_tensor(rng, {8, 4, 16, 16}, dtype, layout);
    for (auto t : {TransformId::kHF, TransformId::kTR, TransformId::kHFTR}) {
      CHECK(apply_transform(apply_transform(v, t), t) == v);
    }
  }
}

TEST_CASE("layout conversion keeps logical content") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const auto v = random_tensor(rng, {5, 3, 4, 6}, i % 2 ? DType::kF32 : DType::kU8, Layout::kTCHW);
    const auto c = convert_layout(v, Layout::kCTHW);
    CHECK(c.layout() == Layout::kCTHW);
    CHECK(convert_layout(c, Layout::kTCHW) == v);
    const auto d = v.dims();
    for (std::uint32_t t = 0; t < d.frames; ++t)
      for (std::uint32_t ch = 0; ch < d.channels; ++ch)
        for (std::uint32_t h = 0; h < d.height; ++h)
          for (std::uint32_t w = 0; w < d.width; ++w) {
            if (v.dtype() == DType::kU8) {
              REQUIRE(v.u8_at(t, ch, h, w) == c.u8_at(t, ch, h, w));
            } else {
              REQUIRE(v.f32_at(t, ch, h, w) == c.f32_at(t, ch, h, w));
            }
          }
  }
}

TEST_CASE("CTHW payload read as TCHW interleaves time and channel") {
  // R0 R1 G0 G1 B0 B1 in CTHW order.
  const std::vector<std::uint8_t> payload{'R', 'r', 'G', 'g', 'B', 'b'};
  const auto v = FrameTensor::from_u8({2, 3, 1, 1}, Layout::kCTHW, payload);
  const auto misread = misinterpret_layout(v, Layout::kTCHW);
  CHECK(misread.layout() == Layout::kTCHW);
  CHECK(misread.u8_at(0, 0, 0, 0) == 'R');
  CHECK(misread.u8_at(0, 1, 0, 0) == 'r');
  CHECK(misread.u8_at(0, 2, 0, 0) == 'G');
  CHECK(misread.u8_at(1, 0, 0, 0) == 'g');
  CHECK(misread.u8_at(1, 1, 0, 0) == 'B');
  CHECK(misread.u8_at(1, 2, 0, 0) == 'b');
  // A correct conversion keeps channels intact.
  const auto good = convert_layout(v, Layout::kTCHW);
  CHECK(as_vector(good.bytes()) == std::vector<std::uint8_t>{'R', 'G', 'B', 'r', 'g', 'b'});
}

TEST_CASE("f32 round trips through bytes") {
  const std::vector<float> values{1.5f, -0.0f, 3.25f, 1e-30f};
  const auto v = FrameTensor::from_f32({2, 1, 1, 2}, Layout::kTCHW, values);
  CHECK(v.f32_flat(0) == 1.5f);
  CHECK(v.f32_at(1, 0, 0, 1) == 1e-30f);
  CHECK(std::signbit(v.f32_flat(1)));
  CHECK(time_reverse(v).f32_flat(0) == 3.25f);
}

TEST_CASE("invalid tensors are rejected") {
  CHECK_THROWS_KIND(FrameTensor({0, 1, 1, 1}, DType::kU8, Layout::kTCHW, {}), ErrorKind::kValidation);
  CHECK_THROWS_KIND(FrameTensor({1, 1, 1, 2}, DType::kU8, Layout::kTCHW, {1}), ErrorKind::kValidation);
  CHECK_THROWS_KIND(FrameTensor({1, 1, 1, 1}, DType::kF32, Layout::kTCHW, {1, 2}), ErrorKind::kValidation);
  CHECK_THROWS_KIND(small_clip().f32_at(0, 0, 0, 0), ErrorKind::kValidation);
}

TEST_CASE("transform ids parse case-insensitively") {
  CHECK(parse_transform_id("tr") == TransformId::kTR);
  CHECK(parse_transform_id("Hf") == TransformId::kHF);
  CHECK(parse_transform_id("HFTR") == TransformId::kHFTR);
  CHECK_THROWS_KIND(parse_transform_id("VF"), ErrorKind::kConfig);
  CHECK_THROWS_KIND(apply_transform(small_clip(), static_cast<TransformId>(9)), ErrorKind::kConfig);
  CHECK(parse_layout("cthw") == Layout::kCTHW);
  CHECK_THROWS_KIND(parse_layout("nhwc"), ErrorKind::kConfig);
}

TEST_CASE("RTEN round trip") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const auto v = random_tensor(rng, {4, 3, 5, 5}, i % 2 ? DType::kF32 : DType::kU8,
                                 i % 3 ? Layout::kTCHW : Layout::kCTHW);
    const auto bytes = rten::encode(v);
    CHECK(bytes.size() == rten::kHeaderSize + v.bytes().size());
    CHECK(rten::decode(bytes) == v);
  }
}

TEST_CASE("RTEN header layout") {
  const auto bytes = rten::encode(small_clip());
  REQUIRE(bytes.size() == 29);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "RTEN");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 0);
  CHECK(bytes[7] == 2);   // T, little-endian
  CHECK(bytes[19] == 3);  // W
}

TEST_CASE("RTEN rejects malformed input") {
  const auto good = rten::encode(small_clip());
  auto bad_magic = good;
  bad_magic[0] = 'X';
  auto bad_version = good;
  bad_version[4] = 2;
  auto bad_dtype = good;
  bad_dtype[5] = 7;
  auto truncated = good;
  truncated.pop_back();
  auto trailing = good;
  trailing.push_back(0);
  for (const auto& b : {bad_magic, bad_version, bad_dtype, truncated, trailing}) {
    CHECK_THROWS_KIND(rten::decode(b), ErrorKind::kParse);
  }
  CHECK_THROWS_KIND(rten::decode(std::vector<std::uint8_t>{'R', 'T'}), ErrorKind::kParse);
  CHECK_THROWS_KIND(rten::read_file("/nonexistent/clip.rten"), ErrorKind::kIo);
}
