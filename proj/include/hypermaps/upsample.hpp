#pragma once

#include "hypermaps/feature_map.hpp"

namespace hypermaps {

/// Two-point interpolation stencil along one axis.
struct AxisTap {
  int i0 = 0;
  int i1 = 0;
  double t = 0.0;  // weight of i1; i0 gets 1 - t
};

/// Corner-aligned mapping of output coordinate `u` (0 .. dst_n - 1, may be
/// fractional) onto a source axis of length `src_n`: u * (src_n - 1) / (dst_n - 1).
AxisTap corner_aligned_tap(double u, int src_n, int dst_n);

/// Naive full-resolution bilinear upsampling, channel by channel. Output
/// corners equal input corners. Used as the reference for the lazy paths.
FeatureMap upsample_bilinear(const FeatureMap& map, ImageSize target);

/// Value of channel `c` of `map` upsampled to `image`, evaluated at image
/// coordinate (x, y) without materializing the upsampled map.
double sample_upsampled(const FeatureMap& map, int c, ImageSize image, double x, double y);

}  // namespace hypermaps
