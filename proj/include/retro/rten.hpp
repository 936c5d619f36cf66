// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "retro/tensor.hpp"

namespace retro::rten {

// On-disk tensor container:
//   "RTEN" | version:u8 = 1 | dtype:u8 (0=u8, 1=f32) | layout:u8 (0=TCHW, 1=CTHW)
//   | T:u32le | C:u32le | H:u32le | W:u32le | payload in layout order (f32 little-endian)
// Dims are always written in T,C,H,W order whatever the layout.
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 23;

std::vector<std::uint8_t> encode(const FrameTensor& v);
// Throws kParse on a bad magic, version, code, size or trailing bytes.
FrameTensor decode(std::span<const std::uint8_t> bytes);

FrameTensor read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const FrameTensor& v);

}  // namespace retro::rten
