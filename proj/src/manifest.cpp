#include "hypermaps/manifest.hpp"

#include <fstream>
#include <set>

#include "hypermaps/errors.hpp"
#include "hypermaps/tensor_file.hpp"

namespace hypermaps {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Fc7Granularity g) { return g == Fc7Granularity::per_image ? "per_image" : "per_patch"; }

fs::path DatasetManifest::resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }

std::vector<const ManifestEntry*> DatasetManifest::fold(const std::string& time_tag) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries)
    if (e.time_tag == time_tag) out.push_back(&e);
  return out;
}

DatasetManifest parse_manifest(const json& j, const fs::path& base_dir) {
  DatasetManifest m;
  m.base_dir = base_dir;
  try {
    for (const auto& je : j.at("entries")) {
      ManifestEntry e;
      e.image_id = je.at("image_id").get<std::string>();
      e.time_tag = je.at("time_tag").get<std::string>();
      for (const auto& [layer, path] : je.at("layer_files").items()) e.layer_files[layer] = path.get<std::string>();
      const auto& size = je.at("image_size");
      e.image_size = {size.at(0).get<int>(), size.at(1).get<int>()};
      if (je.contains("change_mask_path") && !je["change_mask_path"].is_null())
        e.change_mask_path = je["change_mask_path"].get<std::string>();
      if (je.contains("label_mask_path") && !je["label_mask_path"].is_null())
        e.label_mask_path = je["label_mask_path"].get<std::string>();
      const auto gran = je.value("fc7_granularity", std::string("per_image"));
      if (gran == "per_image") {
        e.fc7_granularity = Fc7Granularity::per_image;
      } else if (gran == "per_patch") {
        e.fc7_granularity = Fc7Granularity::per_patch;
      } else {
        throw DataError("entry '" + e.image_id + "': unknown fc7_granularity '" + gran + "'");
      }
      if (je.contains("patch_grid_stride")) {
        const auto& s = je["patch_grid_stride"];
        e.patch_grid_stride = {s.at(0).get<int>(), s.at(1).get<int>()};
      }
      m.entries.push_back(std::move(e));
    }
  } catch (const json::exception& ex) {
    throw DataError(std::string("malformed manifest: ") + ex.what());
  }
  return m;
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& ex) {
    throw DataError("cannot parse manifest " + path.string() + ": " + ex.what());
  }
  return parse_manifest(j, path.parent_path());
}

json manifest_to_json(const DatasetManifest& manifest) {
  json entries = json::array();
  for (const auto& e : manifest.entries) {
    json je;
    je["image_id"] = e.image_id;
    je["time_tag"] = e.time_tag;
    json files = json::object();
    for (const auto& [layer, path] : e.layer_files) files[layer] = path.generic_string();
    je["layer_files"] = files;
    je["image_size"] = {e.image_size.height, e.image_size.width};
    je["change_mask_path"] = e.change_mask_path ? json(e.change_mask_path->generic_string()) : json(nullptr);
    je["label_mask_path"] = e.label_mask_path ? json(e.label_mask_path->generic_string()) : json(nullptr);
    je["fc7_granularity"] = to_string(e.fc7_granularity);
    if (e.fc7_granularity == Fc7Granularity::per_patch)
      je["patch_grid_stride"] = {e.patch_grid_stride.x, e.patch_grid_stride.y};
    entries.push_back(std::move(je));
  }
  return json{{"version", 1}, {"entries", entries}};
}

void save_manifest(const fs::path& path, const DatasetManifest& manifest) {
  const std::string text = manifest_to_json(manifest).dump(2) + "\n";
  write_file_atomic(path, std::as_bytes(std::span(text.data(), text.size())));
}

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

// Returns an empty string when the tensor header fits the segment.
std::string check_layer_header(const TensorHeader& h, const LayoutSegment& seg, const ManifestEntry& e) {
  const auto channels = static_cast<int>(h.dims[0]);
  if (channels != seg.channels) {
    return "expected " + std::to_string(seg.channels) + " channels, file has " + std::to_string(channels);
  }
  if (seg.kind == LayerKind::map) {
    if (h.dims.size() != 3) return "spatial layer must be a rank-3 tensor";
    if (static_cast<int>(h.dims[1]) > e.image_size.height || static_cast<int>(h.dims[2]) > e.image_size.width)
      return "feature map is larger than the image";
    if (h.dims[1] == 0 || h.dims[2] == 0) return "feature map has an empty spatial extent";
    return {};
  }
  if (e.fc7_granularity == Fc7Granularity::per_image) {
    if (h.dims.size() == 1 || (h.dims[1] == 1 && h.dims[2] == 1)) return {};
    return "per_image vector layer must have shape (C) or (C, 1, 1)";
  }
  const int gh = ceil_div(e.image_size.height, e.patch_grid_stride.y);
  const int gw = ceil_div(e.image_size.width, e.patch_grid_stride.x);
  if (h.dims.size() != 3 || static_cast<int>(h.dims[1]) != gh || static_cast<int>(h.dims[2]) != gw) {
    return "per_patch vector layer must have shape (C, " + std::to_string(gh) + ", " + std::to_string(gw) + ")";
  }
  return {};
}

}  // namespace

std::vector<ManifestViolation> validate_manifest(const DatasetManifest& manifest, const DescriptorLayout& layout) {
  std::vector<ManifestViolation> out;
  std::set<std::string> seen_ids;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    const int idx = static_cast<int>(i);
    auto report = [&](std::string field, std::string message) {
      out.push_back({idx, std::move(field), std::move(message)});
    };

    if (e.image_id.empty()) {
      report("image_id", "empty image id");
    } else if (!seen_ids.insert(e.image_id).second) {
      report("image_id", "duplicate image id '" + e.image_id + "'");
    }
    if (e.time_tag != kFoldT0 && e.time_tag != kFoldT1) {
      report("time_tag", "time tag '" + e.time_tag + "' is neither t0 nor t1");
    }
    const bool size_ok = e.image_size.height > 0 && e.image_size.width > 0;
    if (!size_ok) report("image_size", "image size must be positive");
    if (e.fc7_granularity == Fc7Granularity::per_patch &&
        (e.patch_grid_stride.x < 1 || e.patch_grid_stride.y < 1)) {
      report("patch_grid_stride", "grid stride must be positive");
    }

    for (const auto& seg : layout.segments) {
      const std::string field = "layer_files." + seg.layer;
      const auto it = e.layer_files.find(seg.layer);
      if (it == e.layer_files.end()) {
        report(field, "layer '" + seg.layer + "' required by the layout is missing");
        continue;
      }
      const auto path = manifest.resolve(it->second);
      if (!fs::exists(path)) {
        report(field, "tensor file " + path.string() + " does not exist");
        continue;
      }
      try {
        const auto header = read_tensor_header(path);
        if (size_ok) {
          if (auto problem = check_layer_header(header, seg, e); !problem.empty()) report(field, problem);
        }
      } catch (const DataError& ex) {
        report(field, ex.what());
      }
    }

    if (e.change_mask_path && !fs::exists(manifest.resolve(*e.change_mask_path))) {
      report("change_mask_path", "change mask " + manifest.resolve(*e.change_mask_path).string() + " does not exist");
    }
    if (e.label_mask_path && !fs::exists(manifest.resolve(*e.label_mask_path))) {
      report("label_mask_path", "label mask " + manifest.resolve(*e.label_mask_path).string() + " does not exist");
    }
  }
  return out;
}

}  // namespace hypermaps
