// SPDX-License-Identifier: Apache-2.0
#include "retro/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <string>

#include "retro/error.hpp"

namespace retro {

namespace {

std::uint32_t load_le32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

void store_le32(std::uint8_t* p, std::uint32_t v) {
  p[0] = static_cast<std::uint8_t>(v);
  p[1] = static_cast<std::uint8_t>(v >> 8);
  p[2] = static_cast<std::uint8_t>(v >> 16);
  p[3] = static_cast<std::uint8_t>(v >> 24);
}

// Number of planes preceding plane (t, c); a plane is one contiguous H*W run.
std::size_t plane_index(const Dims& d, Layout layout, std::uint32_t t, std::uint32_t c) {
  return layout == Layout::kTCHW ? std::size_t{t} * d.channels + c : std::size_t{c} * d.frames + t;
}

}  // namespace

std::size_t element_size(DType dtype) { return dtype == DType::kU8 ? 1 : 4; }

std::string_view to_string(DType dtype) { return dtype == DType::kU8 ? "u8" : "f32"; }

std::string_view to_string(Layout layout) { return layout == Layout::kTCHW ? "TCHW" : "CTHW"; }

std::string_view to_string(TransformId id) {
  switch (id) {
    case TransformId::kHF: return "HF";
    case TransformId::kTR: return "TR";
    case TransformId::kHFTR: return "HFTR";
  }
  return "?";
}

std::optional<TransformId> try_parse_transform_id(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  if (upper == "HF") return TransformId::kHF;
  if (upper == "TR") return TransformId::kTR;
  if (upper == "HFTR") return TransformId::kHFTR;
  return std::nullopt;
}

TransformId parse_transform_id(std::string_view text) {
  if (auto id = try_parse_transform_id(text)) return *id;
  throw Error(ErrorKind::kConfig, "unknown transform id '" + std::string(text) + "' (expected HF, TR or HFTR)");
}

Layout parse_layout(std::string_view text) {
  if (text == "TCHW" || text == "tchw") return Layout::kTCHW;
  if (text == "CTHW" || text == "cthw") return Layout::kCTHW;
  throw Error(ErrorKind::kConfig, "unknown layout '" + std::string(text) + "' (expected tchw or cthw)");
}

FrameTensor::FrameTensor(Dims dims, DType dtype, Layout layout, std::vector<std::uint8_t> payload)
    : dims_(dims), dtype_(dtype), layout_(layout), payload_(std::move(payload)) {
  if (dims_.frames == 0 || dims_.channels == 0 || dims_.height == 0 || dims_.width == 0) {
    throw Error(ErrorKind::kValidation, "tensor dims must all be positive");
  }
  const std::uint64_t expected = dims_.count() * element_size(dtype_);
  if (payload_.size() != expected) {
    throw Error(ErrorKind::kValidation, "payload holds " + std::to_string(payload_.size()) +
                                            " bytes but dims require " + std::to_string(expected));
  }
}

FrameTensor FrameTensor::from_u8(Dims dims, Layout layout, std::span<const std::uint8_t> values) {
  return FrameTensor(dims, DType::kU8, layout, std::vector<std::uint8_t>(values.begin(), values.end()));
}

FrameTensor FrameTensor::from_f32(Dims dims, Layout layout, std::span<const float> values) {
  std::vector<std::uint8_t> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    store_le32(bytes.data() + 4 * i, std::bit_cast<std::uint32_t>(values[i]));
  }
  return FrameTensor(dims, DType::kF32, layout, std::move(bytes));
}

std::size_t FrameTensor::offset(std::uint32_t t, std::uint32_t c, std::uint32_t h, std::uint32_t w) const {
  const std::size_t plane = std::size_t{dims_.height} * dims_.width;
  return plane_index(dims_, layout_, t, c) * plane + std::size_t{h} * dims_.width + w;
}

std::uint8_t FrameTensor::u8_at(std::uint32_t t, std::uint32_t c, std::uint32_t h, std::uint32_t w) const {
  return u8_flat(offset(t, c, h, w));
}

float FrameTensor::f32_at(std::uint32_t t, std::uint32_t c, std::uint32_t h, std::uint32_t w) const {
  return f32_flat(offset(t, c, h, w));
}

std::uint8_t FrameTensor::u8_flat(std::size_t index) const {
  if (dtype_ != DType::kU8) throw Error(ErrorKind::kValidation, "tensor dtype is not u8");
  return payload_.at(index);
}

float FrameTensor::f32_flat(std::size_t index) const {
  if (dtype_ != DType::kF32) throw Error(ErrorKind::kValidation, "tensor dtype is not f32");
  if (index >= element_count()) throw Error(ErrorKind::kValidation, "element index out of range");
  return std::bit_cast<float>(load_le32(payload_.data() + 4 * index));
}

FrameTensor time_reverse(const FrameTensor& v) {
  const Dims& d = v.dims();
  const std::size_t plane_bytes = std::size_t{d.height} * d.width * element_size(v.dtype());
  const auto src = v.bytes();
  std::vector<std::uint8_t> out(src.size());
  for (std::uint32_t t = 0; t < d.frames; ++t) {
    for (std::uint32_t c = 0; c < d.channels; ++c) {
      const std::size_t from = plane_index(d, v.layout(), d.frames - 1 - t, c) * plane_bytes;
      const std::size_t to = plane_index(d, v.layout(), t, c) * plane_bytes;
      std::memcpy(out.data() + to, src.data() + from, plane_bytes);
    }
  }
  return FrameTensor(d, v.dtype(), v.layout(), std::move(out));
}

FrameTensor horizontal_flip(const FrameTensor& v) {
  // Width is the innermost axis in both layouts, so every row is contiguous.
  const std::size_t esize = element_size(v.dtype());
  const std::size_t row_elems = v.dims().width;
  const std::size_t row_bytes = row_elems * esize;
  const auto src = v.bytes();
  std::vector<std::uint8_t> out(src.size());
  for (std::size_t row = 0; row < src.size(); row += row_bytes) {
    for (std::size_t w = 0; w < row_elems; ++w) {
      std::memcpy(out.data() + row + w * esize, src.data() + row + (row_elems - 1 - w) * esize, esize);
    }
  }
  return FrameTensor(v.dims(), v.dtype(), v.layout(), std::move(out));
}

FrameTensor apply_transform(const FrameTensor& v, TransformId id) {
  switch (id) {
    case TransformId::kHF: return horizontal_flip(v);
    case TransformId::kTR: return time_reverse(v);
    case TransformId::kHFTR: return time_reverse(horizontal_flip(v));
  }
  throw Error(ErrorKind::kConfig, "unknown transform id " + std::to_string(static_cast<int>(id)));
}

FrameTensor convert_layout(const FrameTensor& v, Layout target) {
  if (v.layout() == target) return v;
  const Dims& d = v.dims();
  const std::size_t plane_bytes = std::size_t{d.height} * d.width * element_size(v.dtype());
  const auto src = v.bytes();
  std::vector<std::uint8_t> out(src.size());
  for (std::uint32_t t = 0; t < d.frames; ++t) {
    for (std::uint32_t c = 0; c < d.channels; ++c) {
      std::memcpy(out.data() + plane_index(d, target, t, c) * plane_bytes,
                  src.data() + plane_index(d, v.layout(), t, c) * plane_bytes, plane_bytes);
    }
  }
  return FrameTensor(d, v.dtype(), target, std::move(out));
}

FrameTensor misinterpret_layout(const FrameTensor& v, Layout assumed) {
  auto bytes = v.bytes();
  return FrameTensor(v.dims(), v.dtype(), assumed, std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
}

}  // namespace retro
