#pragma once

#include <string>
#include <vector>

#include "hypermaps/descriptor.hpp"
#include "hypermaps/weights.hpp"

namespace hypermaps {

inline constexpr int kDivisions = 9;
inline constexpr int kVariantsPerSample = 2 * kDivisions;

/// A labelled training patch. variant_id = 2 * division + flipped; variant 0
/// is the untouched original.
struct PatchSample {
  std::string image_id;
  std::string time_tag;
  PatchSpec patch;
  int label = 0;
  int variant_id = 0;

  int division() const { return variant_id / 2; }
  bool flipped() const { return variant_id % 2 == 1; }

  friend bool operator==(const PatchSample&, const PatchSample&) = default;
};

/// Division 0 is the full patch. Divisions 1..8 are the half-size windows of
/// a 3x3 grid with half-window offsets (the centre cell is the original),
/// in raster order, each resampled to `patch.size` samples.
SampleWindow division_window(const PatchSpec& patch, int division);

/// Window of a variant in the coordinates of the image it is extracted
/// from: the original image, or its left-right mirror when flipped.
SampleWindow variant_window(const PatchSample& sample, ImageSize image);

/// Toggles the flip bit of a variant.
PatchSample flip(const PatchSample& sample);

/// The 18 variants {9 divisions} x {unflipped, flipped}, ordered by
/// (division, flip). The patch must lie inside the image and be >= 2 px.
std::vector<PatchSample> augment(const PatchSample& sample, ImageSize image);

}  // namespace hypermaps
