#pragma once

// Binary tensor container shared with the feature exporter.
//
// Layout (all integers little-endian):
//   magic      4 bytes  "HMTF"
//   version    u32      1
//   dtype_code u8       0 = float32
//   ndim       u8       1 (flat vector) or 3 (channels, height, width)
//   dims       u32 x ndim
//   data       float32 x prod(dims), row-major, little-endian

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hypermaps/errors.hpp"

namespace hypermaps {

inline constexpr std::uint32_t kTensorVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 0;

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct TensorHeader {
  std::uint32_t version = 0;
  std::uint8_t dtype_code = 0;
  std::vector<std::uint32_t> dims;
  std::size_t header_bytes = 0;

  std::size_t element_count() const;
};

class TensorFileError : public DataError {
 public:
  enum class Kind { io, bad_magic, unsupported_version, unsupported_dtype, bad_rank, truncated, trailing_bytes };

  TensorFileError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Serializes a tensor to its exact on-disk bytes.
std::vector<std::byte> encode_tensor(std::span<const std::uint32_t> dims, std::span<const float> values);

/// Parses a complete tensor from bytes. `source` names the origin in error messages.
Tensor decode_tensor(std::span<const std::byte> bytes, const std::string& source = "<memory>");

/// Parses the header only; does not check the payload length.
TensorHeader decode_tensor_header(std::span<const std::byte> bytes, const std::string& source = "<memory>");

void write_tensor(const std::filesystem::path& path, std::span<const std::uint32_t> dims,
                  std::span<const float> values);
Tensor read_tensor(const std::filesystem::path& path);
TensorHeader read_tensor_header(const std::filesystem::path& path);

/// Writes bytes to `path` through a temporary sibling and a rename.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes);
std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);

}  // namespace hypermaps
