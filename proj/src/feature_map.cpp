#include "hypermaps/feature_map.hpp"

#include <cmath>

#include "hypermaps/errors.hpp"
#include "hypermaps/tensor_file.hpp"

namespace hypermaps {

FeatureMap::FeatureMap(int channels, int height, int width)
    : FeatureMap(channels, height, width,
                 std::vector<float>(static_cast<std::size_t>(std::max(channels, 0)) * std::max(height, 0) *
                                    std::max(width, 0))) {}

FeatureMap::FeatureMap(int channels, int height, int width, std::vector<float> values)
    : channels_(channels), height_(height), width_(width), values_(std::move(values)) {
  if (channels < 1 || height < 1 || width < 1) {
    throw ValidationError("feature map dimensions must be >= 1, got " + std::to_string(channels) + "x" +
                          std::to_string(height) + "x" + std::to_string(width));
  }
  if (values_.size() != static_cast<std::size_t>(channels) * height * width) {
    throw ValidationError("feature map value count does not match its dimensions");
  }
  for (float v : values_) {
    if (!std::isfinite(v)) throw ValidationError("feature map contains a non-finite value");
  }
}

const FeatureMap& FeatureStack::layer(const std::string& name) const {
  const auto it = layers.find(name);
  if (it == layers.end()) throw ValidationError("stack '" + image_id + "' has no layer '" + name + "'");
  return it->second;
}

void FeatureStack::check_layout(const DescriptorLayout& layout) const {
  for (const auto& seg : layout.segments) {
    const auto& map = layer(seg.layer);
    if (map.channels() != seg.channels) {
      throw ValidationError("layer '" + seg.layer + "' has " + std::to_string(map.channels()) +
                            " channels, layout expects " + std::to_string(seg.channels));
    }
    if (seg.kind == LayerKind::map && (map.height() > image_size.height || map.width() > image_size.width)) {
      throw ValidationError("layer '" + seg.layer + "' is larger than the image");
    }
  }
}

FeatureStack load_stack(const DatasetManifest& manifest, const ManifestEntry& entry, const DescriptorLayout& layout) {
  FeatureStack stack;
  stack.image_id = entry.image_id;
  stack.image_size = entry.image_size;
  stack.vector_granularity = entry.fc7_granularity;
  stack.patch_grid_stride = entry.patch_grid_stride;
  for (const auto& seg : layout.segments) {
    const auto it = entry.layer_files.find(seg.layer);
    if (it == entry.layer_files.end()) {
      throw DataError("entry '" + entry.image_id + "' has no file for layer '" + seg.layer + "'");
    }
    Tensor t = read_tensor(manifest.resolve(it->second));
    const int c = static_cast<int>(t.dims[0]);
    const int h = t.dims.size() == 3 ? static_cast<int>(t.dims[1]) : 1;
    const int w = t.dims.size() == 3 ? static_cast<int>(t.dims[2]) : 1;
    try {
      stack.layers.emplace(seg.layer, FeatureMap(c, h, w, std::move(t.values)));
    } catch (const ValidationError& ex) {
      throw DataError("entry '" + entry.image_id + "', layer '" + seg.layer + "': " + ex.what());
    }
  }
  try {
    stack.check_layout(layout);
  } catch (const ValidationError& ex) {
    throw DataError("entry '" + entry.image_id + "': " + ex.what());
  }
  return stack;
}

std::map<std::string, std::filesystem::path> save_stack_layers(const FeatureStack& stack,
                                                               const DescriptorLayout& layout,
                                                               const std::filesystem::path& dir,
                                                               const std::string& prefix) {
  std::map<std::string, std::filesystem::path> files;
  for (const auto& seg : layout.segments) {
    const auto& name = seg.layer;
    const auto& map = stack.layer(name);
    const auto file = prefix + "_" + name + ".hmtf";
    if (seg.kind == LayerKind::vector && stack.vector_granularity == Fc7Granularity::per_image) {
      const std::uint32_t dims[] = {static_cast<std::uint32_t>(map.channels())};
      write_tensor(dir / file, dims, map.values());
    } else {
      const std::uint32_t dims[] = {static_cast<std::uint32_t>(map.channels()),
                                    static_cast<std::uint32_t>(map.height()),
                                    static_cast<std::uint32_t>(map.width())};
      write_tensor(dir / file, dims, map.values());
    }
    files[name] = file;
  }
  return files;
}

FeatureStack flip_horizontal(const FeatureStack& stack) {
  FeatureStack out = stack;
  for (auto& [name, map] : out.layers) {
    const auto& src = stack.layers.at(name);
    for (int c = 0; c < map.channels(); ++c)
      for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) map.at(c, y, x) = src.at(c, y, src.width() - 1 - x);
  }
  return out;
}

}  // namespace hypermaps
