#include "hypermaps/descriptor.hpp"

#include <cmath>

#include "hypermaps/errors.hpp"
#include "hypermaps/upsample.hpp"

namespace hypermaps {
namespace {

// Weights of the samples along one axis that land inside the image.
struct AxisSamples {
  std::vector<double> position;
  std::vector<double> weight;
};

AxisSamples axis_samples(double origin, double step, int n, int extent, double mu, double sigma2, bool weighted) {
  AxisSamples a;
  for (int i = 0; i < n; ++i) {
    const double p = origin + step * i;
    if (p < 0.0 || p > extent - 1) continue;
    double w = 1.0;
    if (weighted) {
      const double d = i - mu;
      w = std::exp(-(d * d) / (2.0 * sigma2));
    }
    a.position.push_back(p);
    a.weight.push_back(w);
  }
  return a;
}

void normalize(std::vector<double>& w) {
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
}

// Weights of the native grid cells after folding the bilinear stencil of
// every sample: sum over samples of w_s * tap(s, i).
struct Projection {
  int first = 0;
  std::vector<double> weight;
};

Projection project(const AxisSamples& a, int src_n, int image_n) {
  Projection p;
  int lo = src_n;
  int hi = -1;
  std::vector<AxisTap> taps;
  taps.reserve(a.position.size());
  for (double pos : a.position) {
    taps.push_back(corner_aligned_tap(pos, src_n, image_n));
    lo = std::min(lo, taps.back().i0);
    hi = std::max(hi, taps.back().i1);
  }
  p.first = lo;
  p.weight.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (std::size_t s = 0; s < taps.size(); ++s) {
    p.weight[taps[s].i0 - lo] += a.weight[s] * (1.0 - taps[s].t);
    if (taps[s].t != 0.0) p.weight[taps[s].i1 - lo] += a.weight[s] * taps[s].t;
  }
  return p;
}

// Window geometry in sample units: per-axis sample weights (separable).
struct WindowWeights {
  AxisSamples x;
  AxisSamples y;
};

void append_vector_layer(const FeatureStack& stack, const FeatureMap& map, double cx, double cy,
                         std::vector<float>& out) {
  int gx = 0;
  int gy = 0;
  if (stack.vector_granularity == Fc7Granularity::per_patch) {
    gx = std::clamp(static_cast<int>(std::floor(cx / stack.patch_grid_stride.x)), 0, map.width() - 1);
    gy = std::clamp(static_cast<int>(std::floor(cy / stack.patch_grid_stride.y)), 0, map.height() - 1);
  }
  for (int c = 0; c < map.channels(); ++c) out.push_back(map.at(c, gy, gx));
}

Descriptor accumulate_layers(const FeatureStack& stack, const WindowWeights& ww, double cx, double cy,
                             const DescriptorLayout& layout) {
  if (ww.x.position.empty() || ww.y.position.empty()) {
    throw ValidationError("patch centred at (" + std::to_string(cx) + ", " + std::to_string(cy) +
                          ") has an empty clamped region");
  }
  Descriptor d;
  d.layout = layout;
  d.values.reserve(static_cast<std::size_t>(layout.length()));
  for (const auto& seg : layout.segments) {
    const FeatureMap& map = stack.layer(seg.layer);
    if (map.channels() != seg.channels) {
      throw ValidationError("layer '" + seg.layer + "' has " + std::to_string(map.channels()) +
                            " channels, layout expects " + std::to_string(seg.channels));
    }
    if (seg.kind == LayerKind::vector) {
      append_vector_layer(stack, map, cx, cy, d.values);
      continue;
    }
    const Projection px = project(ww.x, map.width(), stack.image_size.width);
    const Projection py = project(ww.y, map.height(), stack.image_size.height);
    for (int c = 0; c < map.channels(); ++c) {
      const auto plane = map.channel(c);
      double total = 0.0;
      for (std::size_t j = 0; j < py.weight.size(); ++j) {
        const float* row = plane.data() + static_cast<std::size_t>(py.first + j) * map.width() + px.first;
        double acc = 0.0;
        for (std::size_t i = 0; i < px.weight.size(); ++i) acc += px.weight[i] * row[i];
        total += py.weight[j] * acc;
      }
      d.values.push_back(static_cast<float>(total));
    }
  }
  return d;
}

}  // namespace

std::span<const float> Descriptor::segment(const std::string& layer) const {
  const auto bounds = layout.boundaries();
  for (std::size_t i = 0; i < layout.segments.size(); ++i) {
    if (layout.segments[i].layer == layer) {
      return std::span<const float>(values).subspan(static_cast<std::size_t>(bounds[i]),
                                                    static_cast<std::size_t>(layout.segments[i].channels));
    }
  }
  throw ValidationError("descriptor has no segment '" + layer + "'");
}

SampleWindow SampleWindow::of(const PatchSpec& patch) {
  const Rect r = patch.region();
  return {static_cast<double>(r.x0), static_cast<double>(r.y0), 1.0, patch.size};
}

SampleWindow SampleWindow::mirrored(ImageSize image) const {
  SampleWindow m = *this;
  m.origin_x = (image.width - 1) - (origin_x + step * (samples - 1));
  return m;
}

Descriptor hypermap_descriptor(const FeatureStack& stack, const PatchSpec& patch, const GaussianParams& params,
                               bool weighted, bool normalized, const DescriptorLayout& layout) {
  if (patch.size < 1) throw ValidationError("patch size must be >= 1");
  if (weighted && !(params.sigma2 > 0.0)) throw ValidationError("sigma2 must be > 0");
  const Rect r = patch.region();
  WindowWeights ww{
      axis_samples(r.x0, 1.0, patch.size, stack.image_size.width, params.mu_x - r.x0, params.sigma2, weighted),
      axis_samples(r.y0, 1.0, patch.size, stack.image_size.height, params.mu_y - r.y0, params.sigma2, weighted)};
  if (normalized && !ww.x.weight.empty() && !ww.y.weight.empty()) {
    normalize(ww.x.weight);
    normalize(ww.y.weight);
  }
  return accumulate_layers(stack, ww, patch.center.x, patch.center.y, layout);
}

Descriptor hypermap_descriptor(const FeatureStack& stack, const SampleWindow& window, const DescriptorConfig& config) {
  if (window.samples < 1 || !(window.step > 0.0)) throw ValidationError("sample window must be non-empty");
  if (config.weighted && !(config.sigma2 > 0.0)) throw ValidationError("sigma2 must be > 0");
  const double mu = (window.samples - 1) / 2.0;
  WindowWeights ww{axis_samples(window.origin_x, window.step, window.samples, stack.image_size.width, mu,
                                config.sigma2, config.weighted),
                   axis_samples(window.origin_y, window.step, window.samples, stack.image_size.height, mu,
                                config.sigma2, config.weighted)};
  if (config.normalized && !ww.x.weight.empty() && !ww.y.weight.empty()) {
    normalize(ww.x.weight);
    normalize(ww.y.weight);
  }
  return accumulate_layers(stack, ww, window.center_x(), window.center_y(), config.layout);
}

Descriptor hypercolumn_descriptor(const FeatureStack& stack, Pixel pixel, const DescriptorLayout& layout) {
  if (!full_rect(stack.image_size).contains(pixel)) {
    throw ValidationError("pixel (" + std::to_string(pixel.x) + ", " + std::to_string(pixel.y) +
                          ") is outside the image");
  }
  Descriptor d;
  d.layout = layout;
  d.values.reserve(static_cast<std::size_t>(layout.length()));
  for (const auto& seg : layout.segments) {
    const FeatureMap& map = stack.layer(seg.layer);
    if (map.channels() != seg.channels) {
      throw ValidationError("layer '" + seg.layer + "' does not match the layout channel count");
    }
    if (seg.kind == LayerKind::vector) {
      append_vector_layer(stack, map, pixel.x, pixel.y, d.values);
      continue;
    }
    for (int c = 0; c < map.channels(); ++c) {
      d.values.push_back(static_cast<float>(sample_upsampled(map, c, stack.image_size, pixel.x, pixel.y)));
    }
  }
  return d;
}

Descriptor extract_descriptor(const FeatureStack& stack, const SampleWindow& window, const DescriptorConfig& config) {
  if (config.kind == DescriptorKind::hypermap) return hypermap_descriptor(stack, window, config);
  const Pixel p{std::clamp(static_cast<int>(std::lround(window.center_x())), 0, stack.image_size.width - 1),
                std::clamp(static_cast<int>(std::lround(window.center_y())), 0, stack.image_size.height - 1)};
  return hypercolumn_descriptor(stack, p, config.layout);
}

}  // namespace hypermaps
