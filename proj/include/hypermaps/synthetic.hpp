#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypermaps/feature_map.hpp"
#include "hypermaps/masks.hpp"

namespace hypermaps {

/// Parameters of the backbone-free feature generator. Every class owns a
/// random signature per channel (drawn from `pattern_seed`); a stack of
/// class c is background + profile(p) * signal * signature_c + noise.
struct SyntheticSpec {
  DescriptorLayout layout = DescriptorLayout::vgg16();
  int classes = 3;
  std::uint64_t pattern_seed = 7;
  double signal = 1.0;
  double noise = 2.0;
  /// Amplify the class signal towards object centres with a Gaussian
  /// profile of `concentration_radius` px; off gives a flat profile.
  bool center_concentration = true;
  double concentration_radius = 10.0;
  /// Native downsampling factor per spatial layer (VGG16: pool2 /4, conv4_3 /8).
  std::map<std::string, int> layer_stride{{"pool2", 4}, {"conv4_3", 8}};

  // Scene composition.
  ImageSize image_size{120, 160};
  int changed_objects = 6;
  int distractor_objects = 4;
  int min_object_size = 24;
  int max_object_size = 36;
  int object_gap = 10;
};

void to_json(nlohmann::json& j, const SyntheticSpec& spec);
void from_json(const nlohmann::json& j, SyntheticSpec& spec);

/// Single-class stack: the whole image carries class `class_id`, with the
/// profile centred on the image centre. Deterministic in (seed, class, spec).
FeatureStack synthesize_stack(std::uint64_t seed, int class_id, ImageSize image_size, const SyntheticSpec& spec);

struct SyntheticObject {
  Rect footprint;
  int label = 0;
  bool changed = true;
};

struct SyntheticScene {
  FeatureStack stack;
  ChangeMask change;
  LabelMask labels;
  std::vector<SyntheticObject> objects;
};

/// Scene with square objects separated by at least `object_gap` px. Changed
/// objects are labelled and marked in the change mask; distractors carry a
/// class signature but stay unlabelled and unchanged.
SyntheticScene synthesize_scene(std::uint64_t seed, const SyntheticSpec& spec);

}  // namespace hypermaps
