#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "hypermaps/manifest.hpp"
#include "hypermaps/tensor_file.hpp"
#include "support.hpp"

using namespace hypermaps;

namespace {

// Writes correctly shaped tensors for one image and returns its entry.
ManifestEntry make_entry(const testing::TempDir& dir, const std::string& id, const std::string& tag,
                         const DescriptorLayout& layout) {
  ManifestEntry e;
  e.image_id = id;
  e.time_tag = tag;
  e.image_size = {16, 24};
  int stride = 4;
  for (const auto& seg : layout.segments) {
    const auto name = id + "_" + seg.layer + ".hmtf";
    std::vector<std::uint32_t> dims;
    if (seg.kind == LayerKind::vector) {
      dims = {static_cast<std::uint32_t>(seg.channels)};
    } else {
      dims = {static_cast<std::uint32_t>(seg.channels), static_cast<std::uint32_t>(16 / stride),
              static_cast<std::uint32_t>(24 / stride)};
      stride *= 2;
    }
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    write_tensor(dir / name, dims, std::vector<float>(n, 0.25f));
    e.layer_files[seg.layer] = name;
  }
  return e;
}

}  // namespace

TEST_CASE("100-entry manifest with three seeded defects yields exactly three violations") {
  testing::TempDir dir("manifest_defects");
  const auto layout = testing::small_layout();
  DatasetManifest m;
  m.base_dir = dir.path();
  for (int i = 0; i < 100; ++i) {
    m.entries.push_back(make_entry(dir, "img" + std::to_string(i), i % 2 ? "t1" : "t0", layout));
  }
  CHECK(validate_manifest(m, layout).empty());

  // Defect 1: a layer file that does not exist.
  m.entries[17].layer_files["pool2"] = "missing.hmtf";
  // Defect 2: wrong channel count.
  const std::uint32_t dims[] = {7, 2, 3};
  write_tensor(dir / "wrong.hmtf", dims, std::vector<float>(42, 0.0f));
  m.entries[42].layer_files["conv4_3"] = "wrong.hmtf";
  // Defect 3: duplicate image id.
  m.entries[88].image_id = "img3";

  const auto v = validate_manifest(m, layout);
  REQUIRE(v.size() == 3);
  CHECK(v[0].entry_index == 17);
  CHECK(v[0].field == "layer_files.pool2");
  CHECK(v[1].entry_index == 42);
  CHECK(v[1].field == "layer_files.conv4_3");
  CHECK(v[1].message.find("7") != std::string::npos);
  CHECK(v[2].entry_index == 88);
  CHECK(v[2].field == "image_id");
}

TEST_CASE("missing conv4_3 layer is reported against that field") {
  testing::TempDir dir("manifest_missing");
  const auto layout = DescriptorLayout::vgg16();
  DatasetManifest m;
  m.base_dir = dir.path();
  m.entries.push_back(make_entry(dir, "a", "t0", layout));
  m.entries[0].layer_files.erase("conv4_3");
  const auto v = validate_manifest(m, layout);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field == "layer_files.conv4_3");
  CHECK(v[0].message.find("missing") != std::string::npos);
}

TEST_CASE("field-level checks") {
  testing::TempDir dir("manifest_fields");
  const auto layout = testing::small_layout();
  DatasetManifest m;
  m.base_dir = dir.path();
  m.entries.push_back(make_entry(dir, "a", "t0", layout));

  SUBCASE("bad time tag") {
    m.entries[0].time_tag = "t2";
    const auto v = validate_manifest(m, layout);
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == "time_tag");
  }
  SUBCASE("feature map larger than the image") {
    m.entries[0].image_size = {2, 2};
    const auto v = validate_manifest(m, layout);
    REQUIRE_FALSE(v.empty());
    CHECK(v[0].field == "layer_files.pool2");
  }
  SUBCASE("missing mask files") {
    m.entries[0].change_mask_path = "nope_change.png";
    m.entries[0].label_mask_path = "nope_labels.png";
    const auto v = validate_manifest(m, layout);
    REQUIRE(v.size() == 2);
    CHECK(v[0].field == "change_mask_path");
    CHECK(v[1].field == "label_mask_path");
  }
  SUBCASE("per-patch vector layer needs a grid") {
    m.entries[0].fc7_granularity = Fc7Granularity::per_patch;
    const auto v = validate_manifest(m, layout);
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == "layer_files.fc7");
  }
}

TEST_CASE("manifest JSON round-trips and resolves relative paths") {
  testing::TempDir dir("manifest_json");
  const auto layout = testing::small_layout();
  DatasetManifest m;
  m.base_dir = dir.path();
  m.entries.push_back(make_entry(dir, "a", "t0", layout));
  m.entries.push_back(make_entry(dir, "b", "t1", layout));
  m.entries[1].change_mask_path = "masks/b_change.png";
  save_manifest(dir / "manifest.json", m);
  const auto back = load_manifest(dir / "manifest.json");
  CHECK(manifest_to_json(back) == manifest_to_json(m));
  CHECK(back.resolve("x.hmtf") == dir / "x.hmtf");
  CHECK(back.resolve("/abs/x.hmtf") == std::filesystem::path("/abs/x.hmtf"));
  REQUIRE(back.fold("t1").size() == 1);
  CHECK(back.fold("t1")[0]->image_id == "b");
}

TEST_CASE("unparseable manifests raise a data error") {
  testing::TempDir dir("manifest_bad");
  std::ofstream(dir / "m.json") << "{\"entries\": [{\"image_id\": 3}]}";
  CHECK_THROWS_AS(load_manifest(dir / "m.json"), DataError);
  std::ofstream(dir / "n.json") << "not json";
  CHECK_THROWS_AS(load_manifest(dir / "n.json"), DataError);
  CHECK_THROWS_AS(load_manifest(dir / "absent.json"), DataError);
}
