#include "hypermaps/tensor_file.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <system_error>

namespace hypermaps {
namespace {

constexpr std::array<char, 4> kMagic = {'H', 'M', 'T', 'F'};

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::byte>((v >> shift) & 0xFFu));
}

std::uint32_t get_u32(std::span<const std::byte> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::to_integer<std::uint32_t>(bytes[offset + i]) << (8 * i);
  return v;
}

std::size_t product(std::span<const std::uint32_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         [](std::size_t a, std::uint32_t b) { return a * b; });
}

}  // namespace

std::size_t TensorHeader::element_count() const { return product(dims); }

std::vector<std::byte> encode_tensor(std::span<const std::uint32_t> dims, std::span<const float> values) {
  if (dims.size() != 1 && dims.size() != 3) {
    throw ValidationError("tensor rank must be 1 or 3, got " + std::to_string(dims.size()));
  }
  if (product(dims) != values.size()) {
    throw ValidationError("tensor dims describe " + std::to_string(product(dims)) + " elements but " +
                          std::to_string(values.size()) + " values were given");
  }
  std::vector<std::byte> out;
  out.reserve(10 + 4 * dims.size() + 4 * values.size());
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  put_u32(out, kTensorVersion);
  out.push_back(static_cast<std::byte>(kDtypeFloat32));
  out.push_back(static_cast<std::byte>(dims.size()));
  for (auto d : dims) put_u32(out, d);
  for (float f : values) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

TensorHeader decode_tensor_header(std::span<const std::byte> bytes, const std::string& source) {
  using Kind = TensorFileError::Kind;
  if (bytes.size() < 10) {
    throw TensorFileError(Kind::truncated, source + ": header truncated (" + std::to_string(bytes.size()) +
                                               " bytes, need at least 10)");
  }
  if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw TensorFileError(Kind::bad_magic, source + ": bad magic, expected \"HMTF\"");
  }
  TensorHeader h;
  h.version = get_u32(bytes, 4);
  if (h.version != kTensorVersion) {
    throw TensorFileError(Kind::unsupported_version,
                          source + ": unsupported tensor version " + std::to_string(h.version));
  }
  h.dtype_code = std::to_integer<std::uint8_t>(bytes[8]);
  if (h.dtype_code != kDtypeFloat32) {
    throw TensorFileError(Kind::unsupported_dtype,
                          source + ": unsupported dtype code " + std::to_string(h.dtype_code));
  }
  const auto ndim = std::to_integer<std::uint8_t>(bytes[9]);
  if (ndim != 1 && ndim != 3) {
    throw TensorFileError(Kind::bad_rank, source + ": rank must be 1 or 3, got " + std::to_string(ndim));
  }
  h.header_bytes = 10 + 4 * std::size_t{ndim};
  if (bytes.size() < h.header_bytes) {
    throw TensorFileError(Kind::truncated, source + ": dims truncated");
  }
  for (std::size_t i = 0; i < ndim; ++i) h.dims.push_back(get_u32(bytes, 10 + 4 * i));
  return h;
}

Tensor decode_tensor(std::span<const std::byte> bytes, const std::string& source) {
  using Kind = TensorFileError::Kind;
  const TensorHeader h = decode_tensor_header(bytes, source);
  const std::size_t count = h.element_count();
  const std::size_t expected = h.header_bytes + 4 * count;
  if (bytes.size() < expected) {
    throw TensorFileError(Kind::truncated, source + ": payload truncated, expected " + std::to_string(expected) +
                                               " bytes, got " + std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw TensorFileError(Kind::trailing_bytes, source + ": " + std::to_string(bytes.size() - expected) +
                                                    " trailing bytes after payload");
  }
  Tensor t;
  t.dims = h.dims;
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    t.values[i] = std::bit_cast<float>(get_u32(bytes, h.header_bytes + 4 * i));
  }
  return t;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw DataError("cannot move " + tmp.string() + " to " + path.string());
  }
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw TensorFileError(TensorFileError::Kind::io, "cannot open " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<std::byte> bytes(size);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw TensorFileError(TensorFileError::Kind::io, "failed reading " + path.string());
  return bytes;
}

void write_tensor(const std::filesystem::path& path, std::span<const std::uint32_t> dims,
                  std::span<const float> values) {
  write_file_atomic(path, encode_tensor(dims, values));
}

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file_bytes(path), path.string()); }

TensorHeader read_tensor_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TensorFileError(TensorFileError::Kind::io, "cannot open " + path.string());
  std::vector<std::byte> head(10 + 4 * 3);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  return decode_tensor_header(head, path.string());
}

}  // namespace hypermaps
