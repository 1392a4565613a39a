#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypermaps/geometry.hpp"
#include "hypermaps/layout.hpp"

namespace hypermaps {

inline constexpr const char* kFoldT0 = "t0";
inline constexpr const char* kFoldT1 = "t1";

enum class Fc7Granularity { per_image, per_patch };

std::string to_string(Fc7Granularity g);

struct ManifestEntry {
  std::string image_id;
  std::string time_tag;
  /// Layer name -> tensor path, relative to the manifest directory unless absolute.
  std::map<std::string, std::filesystem::path> layer_files;
  ImageSize image_size;
  std::optional<std::filesystem::path> change_mask_path;
  std::optional<std::filesystem::path> label_mask_path;
  Fc7Granularity fc7_granularity = Fc7Granularity::per_image;
  /// Cell size of the per-patch vector grid; vector cell (gy, gx) covers
  /// pixels [gx*stride_x, (gx+1)*stride_x) x [gy*stride_y, (gy+1)*stride_y).
  Pixel patch_grid_stride{10, 10};
};

struct DatasetManifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::vector<const ManifestEntry*> fold(const std::string& time_tag) const;
};

struct ManifestViolation {
  int entry_index = -1;
  std::string field;
  std::string message;
};

/// Parses a manifest; relative paths resolve against `base_dir`.
DatasetManifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir);
DatasetManifest load_manifest(const std::filesystem::path& path);
nlohmann::json manifest_to_json(const DatasetManifest& manifest);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Checks every entry against the layout: fold tags, referenced files,
/// tensor headers and channel counts.
std::vector<ManifestViolation> validate_manifest(const DatasetManifest& manifest, const DescriptorLayout& layout);

}  // namespace hypermaps
