#include "hypermaps/upsample.hpp"

#include <cmath>

#include "hypermaps/errors.hpp"

namespace hypermaps {

AxisTap corner_aligned_tap(double u, int src_n, int dst_n) {
  if (src_n == 1 || dst_n == 1) return {0, 0, 0.0};
  const double s = u * static_cast<double>(src_n - 1) / static_cast<double>(dst_n - 1);
  int i0 = static_cast<int>(std::floor(s));
  i0 = std::clamp(i0, 0, src_n - 1);
  const int i1 = std::min(i0 + 1, src_n - 1);
  return {i0, i1, i1 == i0 ? 0.0 : s - i0};
}

FeatureMap upsample_bilinear(const FeatureMap& map, ImageSize target) {
  if (target.height < map.height() || target.width < map.width()) {
    throw ValidationError("upsample target " + std::to_string(target.height) + "x" + std::to_string(target.width) +
                          " is smaller than the source map");
  }
  FeatureMap out(map.channels(), target.height, target.width);
  for (int c = 0; c < map.channels(); ++c) {
    for (int y = 0; y < target.height; ++y) {
      const AxisTap ty = corner_aligned_tap(y, map.height(), target.height);
      for (int x = 0; x < target.width; ++x) {
        const AxisTap tx = corner_aligned_tap(x, map.width(), target.width);
        const double top = (1.0 - tx.t) * map.at(c, ty.i0, tx.i0) + tx.t * map.at(c, ty.i0, tx.i1);
        const double bottom = (1.0 - tx.t) * map.at(c, ty.i1, tx.i0) + tx.t * map.at(c, ty.i1, tx.i1);
        out.at(c, y, x) = static_cast<float>((1.0 - ty.t) * top + ty.t * bottom);
      }
    }
  }
  return out;
}

double sample_upsampled(const FeatureMap& map, int c, ImageSize image, double x, double y) {
  const AxisTap ty = corner_aligned_tap(y, map.height(), image.height);
  const AxisTap tx = corner_aligned_tap(x, map.width(), image.width);
  const double top = (1.0 - tx.t) * map.at(c, ty.i0, tx.i0) + tx.t * map.at(c, ty.i0, tx.i1);
  const double bottom = (1.0 - tx.t) * map.at(c, ty.i1, tx.i0) + tx.t * map.at(c, ty.i1, tx.i1);
  return (1.0 - ty.t) * top + ty.t * bottom;
}

}  // namespace hypermaps
