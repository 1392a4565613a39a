#pragma once

#include <vector>

#include "hypermaps/feature_map.hpp"
#include "hypermaps/geometry.hpp"

namespace hypermaps {

/// Square patch of side `size` around `center`. The unclamped region is
/// [cx - size/2, cx - size/2 + size) on each axis, so even sizes extend one
/// pixel further towards the top-left.
struct PatchSpec {
  Pixel center;
  int size = 1;

  Rect region() const;
  Rect clamped(ImageSize image) const { return region().intersect(full_rect(image)); }
  /// Geometric centre of the unclamped region (half-integer for even sizes).
  double mu_x() const { return center.x - size / 2 + (size - 1) / 2.0; }
  double mu_y() const { return center.y - size / 2 + (size - 1) / 2.0; }

  friend bool operator==(const PatchSpec&, const PatchSpec&) = default;
};

struct GaussianParams {
  double sigma2 = 300.0;  // px^2
  double mu_x = 0.0;
  double mu_y = 0.0;

  static GaussianParams centered_on(const PatchSpec& patch, double sigma2) {
    return {sigma2, patch.mu_x(), patch.mu_y()};
  }
};

/// Per-pixel weights over a clamped patch region, row-major.
struct WeightGrid {
  Rect region;
  std::vector<double> weights;
  bool uniform = false;

  double at(int x, int y) const {
    return weights[static_cast<std::size_t>(y - region.y0) * region.width() + (x - region.x0)];
  }
  double sum() const;
};

/// alpha_i = exp(-((x_i - mu_x)^2 + (y_i - mu_y)^2) / (2 sigma2)) over the
/// clamped region, divided by their sum when `normalized`.
WeightGrid gaussian_weights(const PatchSpec& patch, const GaussianParams& params, ImageSize image, bool normalized);

/// Equal weights over the clamped region: 1/n when normalized, 1 otherwise.
WeightGrid uniform_weights(const PatchSpec& patch, ImageSize image, bool normalized);

/// sum_i alpha_i f_ik over the weight region of an image-resolution map,
/// computed as a direct row-wise dot product.
double accumulate_channel(const FeatureMap& map, int channel, const WeightGrid& weights);

/// Per-channel summed-area tables over an image-resolution map. Built once,
/// read-only afterwards. The referenced map must outlive this object.
class ChannelIntegrals {
 public:
  explicit ChannelIntegrals(const FeatureMap& map);

  const FeatureMap& map() const { return *map_; }
  /// Sum of channel `c` over `r` in O(1).
  double region_sum(int c, const Rect& r) const;

 private:
  double table(int c, int y, int x) const {
    return sums_[(static_cast<std::size_t>(c) * (map_->height() + 1) + y) * (map_->width() + 1) + x];
  }

  const FeatureMap* map_;
  std::vector<double> sums_;
};

/// Uniform grids are answered from the summed-area table; other grids fall
/// back to the direct dot product.
double accumulate_channel(const ChannelIntegrals& integrals, int channel, const WeightGrid& weights);

}  // namespace hypermaps
