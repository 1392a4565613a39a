#include "hypermaps/weights.hpp"

#include <cmath>
#include <numeric>

#include "hypermaps/errors.hpp"

namespace hypermaps {
namespace {

Rect checked_region(const PatchSpec& patch, ImageSize image) {
  if (patch.size < 1) throw ValidationError("patch size must be >= 1");
  const Rect r = patch.clamped(image);
  if (r.empty()) {
    throw ValidationError("patch at (" + std::to_string(patch.center.x) + ", " + std::to_string(patch.center.y) +
                          ") size " + std::to_string(patch.size) + " does not intersect the image");
  }
  return r;
}

void check_bounds(const FeatureMap& map, int channel, const Rect& r) {
  if (channel < 0 || channel >= map.channels()) throw ValidationError("channel index out of range");
  if (r.x0 < 0 || r.y0 < 0 || r.x1 > map.width() || r.y1 > map.height()) {
    throw ValidationError("weight region lies outside the feature map");
  }
}

}  // namespace

Rect PatchSpec::region() const {
  const int x0 = center.x - size / 2;
  const int y0 = center.y - size / 2;
  return {x0, y0, x0 + size, y0 + size};
}

double WeightGrid::sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

WeightGrid gaussian_weights(const PatchSpec& patch, const GaussianParams& params, ImageSize image, bool normalized) {
  if (!(params.sigma2 > 0.0)) throw ValidationError("sigma2 must be > 0");
  WeightGrid g;
  g.region = checked_region(patch, image);
  g.weights.reserve(static_cast<std::size_t>(g.region.width()) * g.region.height());
  const double denom = 2.0 * params.sigma2;
  for (int y = g.region.y0; y < g.region.y1; ++y) {
    const double dy = y - params.mu_y;
    for (int x = g.region.x0; x < g.region.x1; ++x) {
      const double dx = x - params.mu_x;
      g.weights.push_back(std::exp(-(dx * dx + dy * dy) / denom));
    }
  }
  if (normalized) {
    const double total = g.sum();
    for (auto& w : g.weights) w /= total;
  }
  return g;
}

WeightGrid uniform_weights(const PatchSpec& patch, ImageSize image, bool normalized) {
  WeightGrid g;
  g.region = checked_region(patch, image);
  const auto n = static_cast<std::size_t>(g.region.width()) * g.region.height();
  g.weights.assign(n, normalized ? 1.0 / static_cast<double>(n) : 1.0);
  g.uniform = true;
  return g;
}

double accumulate_channel(const FeatureMap& map, int channel, const WeightGrid& weights) {
  const Rect& r = weights.region;
  check_bounds(map, channel, r);
  const auto plane = map.channel(channel);
  const auto w = static_cast<std::size_t>(r.width());
  double total = 0.0;
  for (int y = r.y0; y < r.y1; ++y) {
    const float* row = plane.data() + static_cast<std::size_t>(y) * map.width() + r.x0;
    const double* wrow = weights.weights.data() + static_cast<std::size_t>(y - r.y0) * w;
    double acc = 0.0;
    for (std::size_t i = 0; i < w; ++i) acc += wrow[i] * row[i];
    total += acc;
  }
  return total;
}

ChannelIntegrals::ChannelIntegrals(const FeatureMap& map) : map_(&map) {
  const int h = map.height();
  const int w = map.width();
  sums_.assign(static_cast<std::size_t>(map.channels()) * (h + 1) * (w + 1), 0.0);
  for (int c = 0; c < map.channels(); ++c) {
    double* base = sums_.data() + static_cast<std::size_t>(c) * (h + 1) * (w + 1);
    for (int y = 0; y < h; ++y) {
      double row = 0.0;
      for (int x = 0; x < w; ++x) {
        row += map.at(c, y, x);
        base[(y + 1) * (w + 1) + (x + 1)] = base[y * (w + 1) + (x + 1)] + row;
      }
    }
  }
}

double ChannelIntegrals::region_sum(int c, const Rect& r) const {
  return table(c, r.y1, r.x1) - table(c, r.y0, r.x1) - table(c, r.y1, r.x0) + table(c, r.y0, r.x0);
}

double accumulate_channel(const ChannelIntegrals& integrals, int channel, const WeightGrid& weights) {
  if (!weights.uniform || weights.weights.empty()) return accumulate_channel(integrals.map(), channel, weights);
  check_bounds(integrals.map(), channel, weights.region);
  return weights.weights.front() * integrals.region_sum(channel, weights.region);
}

}  // namespace hypermaps
