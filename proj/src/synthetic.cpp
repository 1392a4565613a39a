#include "hypermaps/synthetic.hpp"

#include <cmath>
#include <functional>

#include "hypermaps/errors.hpp"
#include "hypermaps/rng.hpp"

namespace hypermaps {
namespace {

std::uint64_t name_salt(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

// Unit-variance signature of one class (or the background when class_id < 0).
std::vector<double> signature(const SyntheticSpec& spec, const LayoutSegment& seg, int class_id) {
  Rng rng(mix_seed(spec.pattern_seed, name_salt(seg.layer) + static_cast<std::uint64_t>(class_id + 1)));
  std::vector<double> z(static_cast<std::size_t>(seg.channels));
  for (auto& v : z) v = rng.normal();
  return z;
}

int native_extent(int image_extent, int stride) { return (image_extent + stride - 1) / stride; }

// Image coordinate of native index j under corner alignment.
double image_coord(int j, int native, int image) {
  return native == 1 ? 0.0 : j * static_cast<double>(image - 1) / (native - 1);
}

double profile(const SyntheticSpec& spec, double dx, double dy) {
  if (!spec.center_concentration) return 1.0;
  const double r2 = spec.concentration_radius * spec.concentration_radius;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * r2));
}

void check_spec(const SyntheticSpec& spec) {
  if (spec.classes < 2) throw ValidationError("synthetic spec needs at least 2 classes");
  if (spec.noise < 0.0) throw ValidationError("synthetic noise must be >= 0");
  if (spec.image_size.height < 1 || spec.image_size.width < 1) throw ValidationError("image size must be positive");
  if (spec.center_concentration && !(spec.concentration_radius > 0.0))
    throw ValidationError("concentration radius must be > 0");
  if (spec.min_object_size < 2 || spec.max_object_size < spec.min_object_size)
    throw ValidationError("object size range is invalid");
}

// Fills a spatial layer: background + sum of object contributions + noise.
// `contribution(x, y, k)` returns the class signal at an image position.
FeatureMap render_layer(const SyntheticSpec& spec, const LayoutSegment& seg, ImageSize image, Rng& noise,
                        const std::function<double(double, double, int)>& contribution) {
  const auto it = spec.layer_stride.find(seg.layer);
  const int stride = it == spec.layer_stride.end() ? 4 : it->second;
  const int h = native_extent(image.height, stride);
  const int w = native_extent(image.width, stride);
  const auto background = signature(spec, seg, -1);
  FeatureMap map(seg.channels, h, w);
  for (int k = 0; k < seg.channels; ++k) {
    for (int j = 0; j < h; ++j) {
      const double y = image_coord(j, h, image.height);
      for (int i = 0; i < w; ++i) {
        const double x = image_coord(i, w, image.width);
        double v = 0.5 * background[static_cast<std::size_t>(k)] + contribution(x, y, k);
        if (spec.noise > 0.0) v += spec.noise * noise.normal();
        map.at(k, j, i) = static_cast<float>(v);
      }
    }
  }
  return map;
}

}  // namespace

FeatureStack synthesize_stack(std::uint64_t seed, int class_id, ImageSize image_size, const SyntheticSpec& spec) {
  check_spec(spec);
  if (class_id < 0 || class_id >= spec.classes) {
    throw ValidationError("class id " + std::to_string(class_id) + " outside 0.." + std::to_string(spec.classes - 1));
  }
  FeatureStack stack;
  stack.image_id = "synthetic_" + std::to_string(seed) + "_c" + std::to_string(class_id);
  stack.image_size = image_size;
  Rng noise(mix_seed(seed, 1));
  const double cx = (image_size.width - 1) / 2.0;
  const double cy = (image_size.height - 1) / 2.0;
  for (const auto& seg : spec.layout.segments) {
    const auto sig = signature(spec, seg, class_id);
    if (seg.kind == LayerKind::vector) {
      const auto background = signature(spec, seg, -1);
      std::vector<float> v(static_cast<std::size_t>(seg.channels));
      for (std::size_t k = 0; k < v.size(); ++k) {
        double x = 0.5 * background[k] + spec.signal * sig[k];
        if (spec.noise > 0.0) x += spec.noise * noise.normal();
        v[k] = static_cast<float>(x);
      }
      stack.layers.emplace(seg.layer, FeatureMap(seg.channels, 1, 1, std::move(v)));
      continue;
    }
    stack.layers.emplace(seg.layer, render_layer(spec, seg, image_size, noise, [&](double x, double y, int k) {
                           return spec.signal * profile(spec, x - cx, y - cy) * sig[static_cast<std::size_t>(k)];
                         }));
  }
  return stack;
}

SyntheticScene synthesize_scene(std::uint64_t seed, const SyntheticSpec& spec) {
  check_spec(spec);
  const ImageSize image = spec.image_size;
  Rng place(mix_seed(seed, 2));
  SyntheticScene scene;

  auto fits = [&](const Rect& r) {
    for (const auto& o : scene.objects) {
      const Rect grown{o.footprint.x0 - spec.object_gap, o.footprint.y0 - spec.object_gap,
                       o.footprint.x1 + spec.object_gap, o.footprint.y1 + spec.object_gap};
      if (!grown.intersect(r).empty()) return false;
    }
    return true;
  };
  const auto label_offset = static_cast<int>(place.below(static_cast<std::uint64_t>(spec.classes)));
  const int total = spec.changed_objects + spec.distractor_objects;
  for (int n = 0; n < total; ++n) {
    const bool changed = n < spec.changed_objects;
    const int label = changed ? (n + label_offset) % spec.classes
                              : static_cast<int>(place.below(static_cast<std::uint64_t>(spec.classes)));
    for (int attempt = 0; attempt < 500; ++attempt) {
      const int size = spec.min_object_size +
                       static_cast<int>(place.below(static_cast<std::uint64_t>(spec.max_object_size - spec.min_object_size + 1)));
      if (size > image.width || size > image.height) break;
      const int x0 = static_cast<int>(place.below(static_cast<std::uint64_t>(image.width - size + 1)));
      const int y0 = static_cast<int>(place.below(static_cast<std::uint64_t>(image.height - size + 1)));
      const Rect r{x0, y0, x0 + size, y0 + size};
      if (fits(r)) {
        scene.objects.push_back({r, label, changed});
        break;
      }
    }
  }

  scene.stack.image_id = "scene_" + std::to_string(seed);
  scene.stack.image_size = image;
  Rng noise(mix_seed(seed, 3));
  for (const auto& seg : spec.layout.segments) {
    if (seg.kind == LayerKind::vector) {
      // Image-level vectors carry no patch information in a multi-object scene.
      const auto background = signature(spec, seg, -1);
      std::vector<float> v(background.begin(), background.end());
      for (auto& x : v) x *= 0.5f;
      scene.stack.layers.emplace(seg.layer, FeatureMap(seg.channels, 1, 1, std::move(v)));
      continue;
    }
    std::vector<std::vector<double>> sigs;
    for (int c = 0; c < spec.classes; ++c) sigs.push_back(signature(spec, seg, c));
    scene.stack.layers.emplace(seg.layer, render_layer(spec, seg, image, noise, [&](double x, double y, int k) {
      double v = 0.0;
      for (const auto& o : scene.objects) {
        const Rect& f = o.footprint;
        if (x < f.x0 - 0.5 || x > f.x1 - 0.5 || y < f.y0 - 0.5 || y > f.y1 - 0.5) continue;
        const double ox = (f.x0 + f.x1 - 1) / 2.0;
        const double oy = (f.y0 + f.y1 - 1) / 2.0;
        v += spec.signal * profile(spec, x - ox, y - oy) * sigs[static_cast<std::size_t>(o.label)][static_cast<std::size_t>(k)];
      }
      return v;
    }));
  }

  scene.change = ChangeMask(image, 0);
  scene.labels = LabelMask(image, kUnlabeled);
  for (const auto& o : scene.objects) {
    if (!o.changed) continue;
    for (int y = o.footprint.y0; y < o.footprint.y1; ++y)
      for (int x = o.footprint.x0; x < o.footprint.x1; ++x) {
        scene.change.at(x, y) = 1;
        scene.labels.at(x, y) = static_cast<std::uint8_t>(o.label);
      }
  }
  return scene;
}

void to_json(nlohmann::json& j, const SyntheticSpec& s) {
  j = {{"layout", s.layout},
       {"classes", s.classes},
       {"pattern_seed", s.pattern_seed},
       {"signal", s.signal},
       {"noise", s.noise},
       {"center_concentration", s.center_concentration},
       {"concentration_radius", s.concentration_radius},
       {"layer_stride", s.layer_stride},
       {"image_size", {s.image_size.height, s.image_size.width}},
       {"changed_objects", s.changed_objects},
       {"distractor_objects", s.distractor_objects},
       {"min_object_size", s.min_object_size},
       {"max_object_size", s.max_object_size},
       {"object_gap", s.object_gap}};
}

void from_json(const nlohmann::json& j, SyntheticSpec& s) {
  SyntheticSpec d;
  s.layout = j.contains("layout") ? j.at("layout").get<DescriptorLayout>() : d.layout;
  s.classes = j.value("classes", d.classes);
  s.pattern_seed = j.value("pattern_seed", d.pattern_seed);
  s.signal = j.value("signal", d.signal);
  s.noise = j.value("noise", d.noise);
  s.center_concentration = j.value("center_concentration", d.center_concentration);
  s.concentration_radius = j.value("concentration_radius", d.concentration_radius);
  s.layer_stride = j.value("layer_stride", d.layer_stride);
  if (j.contains("image_size")) {
    s.image_size = {j["image_size"].at(0).get<int>(), j["image_size"].at(1).get<int>()};
  } else {
    s.image_size = d.image_size;
  }
  s.changed_objects = j.value("changed_objects", d.changed_objects);
  s.distractor_objects = j.value("distractor_objects", d.distractor_objects);
  s.min_object_size = j.value("min_object_size", d.min_object_size);
  s.max_object_size = j.value("max_object_size", d.max_object_size);
  s.object_gap = j.value("object_gap", d.object_gap);
}

}  // namespace hypermaps
