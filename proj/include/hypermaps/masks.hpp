#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hypermaps/geometry.hpp"

namespace hypermaps {

inline constexpr int kNumLabels = 3;
inline constexpr std::uint8_t kUnlabeled = 255;
inline constexpr std::array<const char*, kNumLabels> kLabelNames = {"car", "building", "rubble"};

/// Row-major per-pixel grid.
template <typename T>
struct PixelGrid {
  ImageSize size;
  std::vector<T> data;

  PixelGrid() = default;
  PixelGrid(ImageSize s, T fill) : size(s), data(static_cast<std::size_t>(s.area()), fill) {}

  T at(int x, int y) const { return data[static_cast<std::size_t>(y) * size.width + x]; }
  T& at(int x, int y) { return data[static_cast<std::size_t>(y) * size.width + x]; }

  friend bool operator==(const PixelGrid&, const PixelGrid&) = default;
};

/// 1 = changed pixel.
using ChangeMask = PixelGrid<std::uint8_t>;
/// 0 car, 1 building, 2 rubble, 255 unlabelled.
using LabelMask = PixelGrid<std::uint8_t>;

struct RgbImage {
  ImageSize size;
  std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

// Masks are stored as 8-bit grayscale PNG; a change mask marks changed
// pixels with any non-zero value and is written as 0/255.
ChangeMask read_change_mask(const std::filesystem::path& path);
void write_change_mask(const std::filesystem::path& path, const ChangeMask& mask);
LabelMask read_label_mask(const std::filesystem::path& path);
void write_label_mask(const std::filesystem::path& path, const LabelMask& mask);

RgbImage read_png_rgb(const std::filesystem::path& path);
std::vector<std::byte> encode_png_rgb(const RgbImage& image);
void write_png_rgb(const std::filesystem::path& path, const RgbImage& image);

}  // namespace hypermaps
