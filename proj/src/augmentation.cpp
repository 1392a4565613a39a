#include "hypermaps/augmentation.hpp"

#include "hypermaps/errors.hpp"

namespace hypermaps {

SampleWindow division_window(const PatchSpec& patch, int division) {
  if (division < 0 || division >= kDivisions) throw ValidationError("division index must be in 0..8");
  if (division == 0) return SampleWindow::of(patch);
  const int cell = division <= 4 ? division - 1 : division;  // skip the centre cell (4)
  const int gx = cell % 3;
  const int gy = cell / 3;
  const Rect r = patch.region();
  const double s = patch.size;
  // Half-size window resampled to s samples at pixel-centre alignment:
  // sample v sits at window_start + (v + 0.5) * 0.5 - 0.5.
  return {r.x0 + gx * s / 4.0 - 0.25, r.y0 + gy * s / 4.0 - 0.25, 0.5, patch.size};
}

SampleWindow variant_window(const PatchSample& sample, ImageSize image) {
  const SampleWindow w = division_window(sample.patch, sample.division());
  return sample.flipped() ? w.mirrored(image) : w;
}

PatchSample flip(const PatchSample& sample) {
  PatchSample out = sample;
  out.variant_id = sample.variant_id ^ 1;
  return out;
}

std::vector<PatchSample> augment(const PatchSample& sample, ImageSize image) {
  if (sample.patch.size < 2) throw ValidationError("cannot augment a patch smaller than 2 px");
  const Rect r = sample.patch.region();
  if (r.intersect(full_rect(image)) != r) {
    throw ValidationError("augmented patch must lie inside the image");
  }
  std::vector<PatchSample> out;
  out.reserve(kVariantsPerSample);
  for (int v = 0; v < kVariantsPerSample; ++v) {
    PatchSample s = sample;
    s.variant_id = v;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace hypermaps
