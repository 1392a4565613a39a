#pragma once

#include <filesystem>
#include <string>

#include <unistd.h>

#include "hypermaps/feature_map.hpp"
#include "hypermaps/rng.hpp"

namespace testing {

namespace fs = std::filesystem;

inline fs::path data_dir() { return HYPERMAPS_TEST_DATA; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    hypermaps::Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(::getpid()));
    path_ = fs::temp_directory_path() / ("hypermaps_" + tag + "_" + std::to_string(rng.next() % 1000000007));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline hypermaps::FeatureMap random_map(hypermaps::Rng& rng, int c, int h, int w) {
  hypermaps::FeatureMap m(c, h, w);
  for (int k = 0; k < c; ++k)
    for (auto& v : m.channel(k)) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return m;
}

// Stack with the given layout channels at native strides 4 and 8 (vector layers 1x1).
inline hypermaps::FeatureStack random_stack(std::uint64_t seed, hypermaps::ImageSize image,
                                            const hypermaps::DescriptorLayout& layout) {
  hypermaps::Rng rng(seed);
  hypermaps::FeatureStack s;
  s.image_id = "random_" + std::to_string(seed);
  s.image_size = image;
  int stride = 4;
  for (const auto& seg : layout.segments) {
    if (seg.kind == hypermaps::LayerKind::vector) {
      s.layers.emplace(seg.layer, random_map(rng, seg.channels, 1, 1));
    } else {
      s.layers.emplace(seg.layer, random_map(rng, seg.channels, (image.height + stride - 1) / stride,
                                             (image.width + stride - 1) / stride));
      stride *= 2;
    }
  }
  return s;
}

// Small layout for tests that do not need full VGG16 widths.
inline hypermaps::DescriptorLayout small_layout() {
  return {{{"pool2", 3, hypermaps::LayerKind::map},
           {"conv4_3", 4, hypermaps::LayerKind::map},
           {"fc7", 5, hypermaps::LayerKind::vector}}};
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) / scale;
}

}  // namespace testing
