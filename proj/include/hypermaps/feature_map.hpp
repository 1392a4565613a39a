#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hypermaps/geometry.hpp"
#include "hypermaps/layout.hpp"
#include "hypermaps/manifest.hpp"

namespace hypermaps {

/// Channels x height x width activations, row-major, all finite.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int channels, int height, int width);
  FeatureMap(int channels, int height, int width, std::vector<float> values);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  ImageSize size() const { return {height_, width_}; }

  float at(int c, int y, int x) const { return values_[index(c, y, x)]; }
  float& at(int c, int y, int x) { return values_[index(c, y, x)]; }

  std::span<const float> channel(int c) const {
    return {values_.data() + static_cast<std::size_t>(c) * plane(), plane()};
  }
  std::span<float> channel(int c) { return {values_.data() + static_cast<std::size_t>(c) * plane(), plane()}; }
  std::span<const float> values() const { return values_; }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t plane() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> values_;
};

/// All layers extracted for one image. Spatial layers are kept at their
/// native resolution and upsampled on demand; a per-image vector layer is a
/// C x 1 x 1 map, a per-patch one is C x grid_h x grid_w.
struct FeatureStack {
  std::string image_id;
  ImageSize image_size;
  std::map<std::string, FeatureMap> layers;
  Fc7Granularity vector_granularity = Fc7Granularity::per_image;
  Pixel patch_grid_stride{10, 10};

  const FeatureMap& layer(const std::string& name) const;
  /// Throws ValidationError unless every layout layer is present with the
  /// expected channel count and spatial layers fit inside the image.
  void check_layout(const DescriptorLayout& layout) const;
};

FeatureStack load_stack(const DatasetManifest& manifest, const ManifestEntry& entry, const DescriptorLayout& layout);

/// Writes every layout layer as a TensorFile under `dir`, returning layer ->
/// file name. Per-image vector layers are written as rank-1 tensors.
std::map<std::string, std::filesystem::path> save_stack_layers(const FeatureStack& stack,
                                                               const DescriptorLayout& layout,
                                                               const std::filesystem::path& dir,
                                                               const std::string& prefix);

/// Mirrors every layer left-right (x -> width - 1 - x).
FeatureStack flip_horizontal(const FeatureStack& stack);

}  // namespace hypermaps
