#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace hypermaps {

/// `map` layers are spatial (C x H x W) and get accumulated over a patch;
/// `vector` layers (fc7) are appended as-is.
enum class LayerKind { map, vector };

struct LayoutSegment {
  std::string layer;
  int channels = 0;
  LayerKind kind = LayerKind::map;

  friend bool operator==(const LayoutSegment&, const LayoutSegment&) = default;
};

/// Ordered concatenation of layer segments that makes up a descriptor.
struct DescriptorLayout {
  std::vector<LayoutSegment> segments;

  /// pool2 (128) + conv4_3 (512) + fc7 (4096) of VGG16.
  static DescriptorLayout vgg16();

  int length() const;
  /// Start offset of every segment, plus the total length as the last element.
  std::vector<int> boundaries() const;
  const LayoutSegment* find(const std::string& layer) const;

  friend bool operator==(const DescriptorLayout&, const DescriptorLayout&) = default;
};

void to_json(nlohmann::json& j, const DescriptorLayout& layout);
void from_json(const nlohmann::json& j, DescriptorLayout& layout);

}  // namespace hypermaps
