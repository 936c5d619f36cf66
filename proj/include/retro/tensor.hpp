// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace retro {

enum class DType : std::uint8_t { kU8 = 0, kF32 = 1 };

// Outermost to innermost stride order. H and W are innermost in both.
enum class Layout : std::uint8_t { kTCHW = 0, kCTHW = 1 };

enum class TransformId : std::uint8_t {
  kHF,    // horizontal flip
  kTR,    // time reversal
  kHFTR,  // flip, then reverse (the two commute)
};

std::size_t element_size(DType dtype);

std::string_view to_string(DType dtype);
std::string_view to_string(Layout layout);
std::string_view to_string(TransformId id);

// Accepts "TR", "tr", "HF", "hf", "HFTR", "hftr". Throws kConfig otherwise.
TransformId parse_transform_id(std::string_view text);
std::optional<TransformId> try_parse_transform_id(std::string_view text);
// Accepts "TCHW" / "tchw" / "CTHW" / "cthw". Throws kConfig otherwise.
Layout parse_layout(std::string_view text);

struct Dims {
  std::uint32_t frames = 0;
  std::uint32_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;

  std::uint64_t count() const {
    return std::uint64_t{frames} * channels * height * width;
  }
  friend bool operator==(const Dims&, const Dims&) = default;
};

// A decoded video clip: T x C x H x W elements in an explicit memory layout.
//
// The payload is little-endian bytes regardless of host order and matches an
// RTEN file body byte for byte. Operations below move whole elements and are
// bit-exact for both dtypes. Instances are immutable.
class FrameTensor {
 public:
  // Throws kValidation when any dim is zero or the payload length is not
  // dims.count() * element_size(dtype).
  FrameTensor(Dims dims, DType dtype, Layout layout, std::vector<std::uint8_t> payload);

  static FrameTensor from_u8(Dims dims, Layout layout, std::span<const std::uint8_t> values);
  static FrameTensor from_f32(Dims dims, Layout layout, std::span<const float> values);

  const Dims& dims() const { return dims_; }
  DType dtype() const { return dtype_; }
  Layout layout() const { return layout_; }
  std::span<const std::uint8_t> bytes() const { return payload_; }
  std::size_t element_count() const { return static_cast<std::size_t>(dims_.count()); }

  // Physical element offset of logical index (t, c, h, w) under layout().
  std::size_t offset(std::uint32_t t, std::uint32_t c, std::uint32_t h, std::uint32_t w) const;

  // Typed reads by logical index. Throws kValidation on a dtype mismatch.
  std::uint8_t u8_at(std::uint32_t t, std::uint32_t c, std::uint32_t h, std::uint32_t w) const;
  float f32_at(std::uint32_t t, std::uint32_t c, std::uint32_t h, std::uint32_t w) const;

  // Typed reads by physical position in the payload.
  std::uint8_t u8_flat(std::size_t index) const;
  float f32_flat(std::size_t index) const;

  friend bool operator==(const FrameTensor&, const FrameTensor&) = default;

 private:
  Dims dims_;
  DType dtype_;
  Layout layout_;
  std::vector<std::uint8_t> payload_;
};

FrameTensor time_reverse(const FrameTensor& v);
FrameTensor horizontal_flip(const FrameTensor& v);
FrameTensor apply_transform(const FrameTensor& v, TransformId id);

// Physically reorders the payload; logical content is unchanged.
FrameTensor convert_layout(const FrameTensor& v, Layout target);

// Relabels the untouched buffer as `assumed`. This is what happens when CTHW
// data is reshaped as (T, C, H, W) without a transpose: frame slices of the
// result interleave channels from different time steps.
FrameTensor misinterpret_layout(const FrameTensor& v, Layout assumed);

}  // namespace retro
