#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "hypermaps/tensor_file.hpp"
#include "support.hpp"

using namespace hypermaps;

namespace {

std::vector<std::byte> bytes_of(std::initializer_list<int> v) {
  std::vector<std::byte> out;
  for (int b : v) out.push_back(static_cast<std::byte>(b));
  return out;
}

}  // namespace

TEST_CASE("single zero element encodes to 18 bytes") {
  const std::uint32_t dims[] = {1};
  const float values[] = {0.0f};
  const auto bytes = encode_tensor(dims, values);
  CHECK(bytes.size() == 18);
  CHECK(bytes == bytes_of({'H', 'M', 'T', 'F', 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0}));
}

TEST_CASE("2x2x2 tensor occupies 54 bytes and round-trips") {
  const std::uint32_t dims[] = {2, 2, 2};
  std::vector<float> values(8);
  for (int i = 0; i < 8; ++i) values[static_cast<std::size_t>(i)] = static_cast<float>(i) * 0.5f - 1.0f;
  const auto bytes = encode_tensor(dims, values);
  CHECK(bytes.size() == 54);
  const Tensor t = decode_tensor(bytes);
  CHECK(t.dims == std::vector<std::uint32_t>{2, 2, 2});
  CHECK(t.values == values);
  const TensorHeader h = decode_tensor_header(bytes);
  CHECK(h.version == kTensorVersion);
  CHECK(h.dtype_code == kDtypeFloat32);
  CHECK(h.header_bytes == 22);
  CHECK(h.element_count() == 8);
}

TEST_CASE("golden file bytes are stable") {
  const auto golden = read_file_bytes(testing::data_dir() / "golden_2x2x2.hmtf");
  const std::uint32_t dims[] = {2, 2, 2};
  const float values[] = {0.0f, 1.0f, -1.0f, 0.5f, 3.25f, -2.5f, 1e-3f, 65504.0f};
  CHECK(encode_tensor(dims, values) == golden);
  const Tensor t = decode_tensor(golden);
  CHECK(std::memcmp(t.values.data(), values, sizeof values) == 0);
}

TEST_CASE("1000 random tensors round-trip bit-exactly through disk") {
  testing::TempDir dir("tensor_roundtrip");
  Rng rng(20240601);
  for (int n = 0; n < 1000; ++n) {
    const bool vector = rng.below(4) == 0;
    std::vector<std::uint32_t> dims;
    if (vector) {
      dims = {static_cast<std::uint32_t>(1 + rng.below(64))};
    } else {
      dims = {static_cast<std::uint32_t>(1 + rng.below(6)), static_cast<std::uint32_t>(1 + rng.below(9)),
              static_cast<std::uint32_t>(1 + rng.below(9))};
    }
    std::size_t count = 1;
    for (auto d : dims) count *= d;
    std::vector<float> values(count);
    for (auto& v : values) {
      // Random bit patterns restricted to finite floats, including denormals and signed zeros.
      std::uint32_t bits = static_cast<std::uint32_t>(rng.next());
      if (((bits >> 23) & 0xFF) == 0xFF) bits &= ~(1u << 30);
      std::memcpy(&v, &bits, sizeof v);
    }
    const auto path = dir / ("t" + std::to_string(n) + ".hmtf");
    write_tensor(path, dims, values);
    const Tensor back = read_tensor(path);
    REQUIRE(back.dims == dims);
    REQUIRE(back.values.size() == values.size());
    REQUIRE(std::memcmp(back.values.data(), values.data(), values.size() * sizeof(float)) == 0);
  }
}

TEST_CASE("malformed inputs are rejected with a typed error") {
  const std::uint32_t dims[] = {2, 3, 1};
  const std::vector<float> values(6, 1.0f);
  const auto good = encode_tensor(dims, values);

  auto kind_of = [](std::vector<std::byte> b) {
    try {
      decode_tensor(b, "probe.hmtf");
    } catch (const TensorFileError& e) {
      return e.kind();
    }
    FAIL("no error raised");
    return TensorFileError::Kind::io;
  };

  SUBCASE("bad magic") {
    auto b = good;
    b[0] = std::byte{'X'};
    CHECK(kind_of(b) == TensorFileError::Kind::bad_magic);
  }
  SUBCASE("unsupported version") {
    auto b = good;
    b[4] = std::byte{2};
    CHECK(kind_of(b) == TensorFileError::Kind::unsupported_version);
  }
  SUBCASE("unsupported dtype") {
    auto b = good;
    b[8] = std::byte{1};
    CHECK(kind_of(b) == TensorFileError::Kind::unsupported_dtype);
  }
  SUBCASE("rank other than 1 or 3") {
    auto b = good;
    b[9] = std::byte{2};
    CHECK(kind_of(b) == TensorFileError::Kind::bad_rank);
  }
  SUBCASE("trailing bytes") {
    auto b = good;
    b.push_back(std::byte{0});
    CHECK(kind_of(b) == TensorFileError::Kind::trailing_bytes);
  }
  SUBCASE("truncated payload names expected and actual sizes") {
    auto b = good;
    b.resize(b.size() - 4);
    CHECK(kind_of(b) == TensorFileError::Kind::truncated);
    try {
      decode_tensor(b, "probe.hmtf");
    } catch (const TensorFileError& e) {
      const std::string what = e.what();
      CHECK(what.find("probe.hmtf") != std::string::npos);
      CHECK(what.find(std::to_string(good.size())) != std::string::npos);
      CHECK(what.find(std::to_string(b.size())) != std::string::npos);
    }
  }
  SUBCASE("truncated header") {
    std::vector<std::byte> b(good.begin(), good.begin() + 7);
    CHECK(kind_of(b) == TensorFileError::Kind::truncated);
  }
}

TEST_CASE("writer validates rank and element count") {
  testing::TempDir dir("tensor_write");
  const std::uint32_t rank2[] = {2, 2};
  const std::vector<float> four(4, 0.0f);
  CHECK_THROWS_AS(write_tensor(dir / "a.hmtf", rank2, four), ValidationError);
  const std::uint32_t rank3[] = {1, 2, 3};
  CHECK_THROWS_AS(write_tensor(dir / "b.hmtf", rank3, four), ValidationError);
  CHECK_FALSE(std::filesystem::exists(dir / "b.hmtf"));
}

TEST_CASE("missing file is an io error") {
  CHECK_THROWS_AS(read_tensor("/nonexistent/dir/x.hmtf"), TensorFileError);
}
