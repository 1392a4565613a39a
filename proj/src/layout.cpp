#include "hypermaps/layout.hpp"

#include "hypermaps/errors.hpp"

namespace hypermaps {

DescriptorLayout DescriptorLayout::vgg16() {
  return {{{"pool2", 128, LayerKind::map}, {"conv4_3", 512, LayerKind::map}, {"fc7", 4096, LayerKind::vector}}};
}

int DescriptorLayout::length() const {
  int n = 0;
  for (const auto& s : segments) n += s.channels;
  return n;
}

std::vector<int> DescriptorLayout::boundaries() const {
  std::vector<int> b{0};
  for (const auto& s : segments) b.push_back(b.back() + s.channels);
  return b;
}

const LayoutSegment* DescriptorLayout::find(const std::string& layer) const {
  for (const auto& s : segments)
    if (s.layer == layer) return &s;
  return nullptr;
}

void to_json(nlohmann::json& j, const DescriptorLayout& layout) {
  j = nlohmann::json::array();
  for (const auto& s : layout.segments) {
    j.push_back({{"layer", s.layer}, {"channels", s.channels}, {"kind", s.kind == LayerKind::map ? "map" : "vector"}});
  }
}

void from_json(const nlohmann::json& j, DescriptorLayout& layout) {
  if (!j.is_array() || j.empty()) throw ValidationError("layout must be a non-empty array of segments");
  layout.segments.clear();
  for (const auto& s : j) {
    LayoutSegment seg;
    seg.layer = s.at("layer").get<std::string>();
    seg.channels = s.at("channels").get<int>();
    const auto kind = s.value("kind", std::string("map"));
    if (kind == "map") {
      seg.kind = LayerKind::map;
    } else if (kind == "vector") {
      seg.kind = LayerKind::vector;
    } else {
      throw ValidationError("layout segment '" + seg.layer + "': unknown kind '" + kind + "'");
    }
    if (seg.channels < 1) throw ValidationError("layout segment '" + seg.layer + "': channels must be >= 1");
    if (layout.find(seg.layer)) throw ValidationError("layout segment '" + seg.layer + "' listed twice");
    layout.segments.push_back(seg);
  }
}

}  // namespace hypermaps
