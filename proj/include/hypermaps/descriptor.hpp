#pragma once

#include <span>
#include <vector>

#include "hypermaps/feature_map.hpp"
#include "hypermaps/layout.hpp"
#include "hypermaps/weights.hpp"

namespace hypermaps {

enum class DescriptorKind { hypermap, hypercolumn };

struct DescriptorConfig {
  DescriptorLayout layout = DescriptorLayout::vgg16();
  DescriptorKind kind = DescriptorKind::hypermap;
  double sigma2 = 300.0;
  bool weighted = true;
  /// Weights sum to one; off reproduces the raw sums.
  bool normalized = true;
};

struct Descriptor {
  std::vector<float> values;
  DescriptorLayout layout;

  std::size_t size() const { return values.size(); }
  /// Values belonging to one layout segment.
  std::span<const float> segment(const std::string& layer) const;
};

/// An n x n grid of sample points at image coordinates
/// (origin_x + step * i, origin_y + step * j). A plain patch has step 1 and
/// integer origin; a resized sub-window has step < 1. Samples that fall
/// outside the image are dropped and the remaining weights renormalized.
struct SampleWindow {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double step = 1.0;
  int samples = 1;

  static SampleWindow of(const PatchSpec& patch);
  double center_x() const { return origin_x + step * (samples - 1) / 2.0; }
  double center_y() const { return origin_y + step * (samples - 1) / 2.0; }
  /// The same window seen in the left-right mirrored image.
  SampleWindow mirrored(ImageSize image) const;

  friend bool operator==(const SampleWindow&, const SampleWindow&) = default;
};

/// Hypermap over an explicit patch. `params.mu` may be anywhere; sigma2 is
/// ignored when `weighted` is false (uniform weights).
Descriptor hypermap_descriptor(const FeatureStack& stack, const PatchSpec& patch, const GaussianParams& params,
                               bool weighted, bool normalized,
                               const DescriptorLayout& layout = DescriptorLayout::vgg16());

/// Hypermap over a sample window, Gaussian centred on the window with sigma2
/// measured in sample units.
Descriptor hypermap_descriptor(const FeatureStack& stack, const SampleWindow& window, const DescriptorConfig& config);

/// Per-pixel concatenation of every layer, spatial layers upsampled to the
/// image on demand.
Descriptor hypercolumn_descriptor(const FeatureStack& stack, Pixel pixel,
                                  const DescriptorLayout& layout = DescriptorLayout::vgg16());

/// Dispatches on `config.kind`. Hypercolumns use the pixel nearest the
/// window centre.
Descriptor extract_descriptor(const FeatureStack& stack, const SampleWindow& window, const DescriptorConfig& config);

}  // namespace hypermaps
