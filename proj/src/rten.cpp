// SPDX-License-Identifier: Apache-2.0
#include "retro/rten.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <string>

#include "retro/error.hpp"

namespace retro::rten {

namespace {

constexpr std::uint8_t kMagic[4] = {'R', 'T', 'E', 'N'};

void put_le32(std::uint8_t* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_le32(std::span<const std::uint8_t> bytes, std::size_t at) {
  return std::uint32_t{bytes[at]} | (std::uint32_t{bytes[at + 1]} << 8) |
         (std::uint32_t{bytes[at + 2]} << 16) | (std::uint32_t{bytes[at + 3]} << 24);
}

}  // namespace

std::vector<std::uint8_t> encode(const FrameTensor& v) {
  const auto payload = v.bytes();
  std::vector<std::uint8_t> out(kHeaderSize + payload.size());
  std::copy(std::begin(kMagic), std::end(kMagic), out.begin());
  out[4] = kVersion;
  out[5] = static_cast<std::uint8_t>(v.dtype());
  out[6] = static_cast<std::uint8_t>(v.layout());
  put_le32(out.data() + 7, v.dims().frames);
  put_le32(out.data() + 11, v.dims().channels);
  put_le32(out.data() + 15, v.dims().height);
  put_le32(out.data() + 19, v.dims().width);
  std::copy(payload.begin(), payload.end(), out.begin() + kHeaderSize);
  return out;
}

FrameTensor decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) {
    throw Error(ErrorKind::kParse, "RTEN stream truncated: " + std::to_string(bytes.size()) + " bytes");
  }
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw Error(ErrorKind::kParse, "bad RTEN magic");
  }
  if (bytes[4] != kVersion) {
    throw Error(ErrorKind::kParse, "unsupported RTEN version " + std::to_string(bytes[4]));
  }
  if (bytes[5] > 1) throw Error(ErrorKind::kParse, "bad RTEN dtype code " + std::to_string(bytes[5]));
  if (bytes[6] > 1) throw Error(ErrorKind::kParse, "bad RTEN layout code " + std::to_string(bytes[6]));
  const auto dtype = static_cast<DType>(bytes[5]);
  const auto layout = static_cast<Layout>(bytes[6]);
  const Dims dims{get_le32(bytes, 7), get_le32(bytes, 11), get_le32(bytes, 15), get_le32(bytes, 19)};
  if (dims.count() == 0) throw Error(ErrorKind::kParse, "RTEN dims must all be positive");

  const std::uint64_t payload_size = dims.count() * element_size(dtype);
  const std::uint64_t available = bytes.size() - kHeaderSize;
  if (available != payload_size) {
    throw Error(ErrorKind::kParse, "RTEN payload is " + std::to_string(available) + " bytes, header implies " +
                                       std::to_string(payload_size));
  }
  return FrameTensor(dims, dtype, layout, std::vector<std::uint8_t>(bytes.begin() + kHeaderSize, bytes.end()));
}

FrameTensor read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::kIo, "failed reading '" + path.string() + "'");
  try {
    return decode(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const FrameTensor& v) {
  const auto bytes = encode(v);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "failed writing '" + path.string() + "'");
}

}  // namespace retro::rten
