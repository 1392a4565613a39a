#include "hypermaps/multiscale.hpp"

#include <algorithm>

#include "hypermaps/errors.hpp"

namespace hypermaps {

void ScaleSet::validate() const {
  if (sizes.empty()) throw ValidationError("scale set is empty");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1) throw ValidationError("patch sizes must be >= 1");
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw ValidationError("patch sizes must be strictly increasing");
  }
}

VoteRecord tally_votes(std::vector<ScaleVote> votes, int classes) {
  if (votes.empty()) throw ValidationError("no votes to tally");
  // Canonical order makes the floating-point score sums order-free.
  std::sort(votes.begin(), votes.end(), [](const ScaleVote& a, const ScaleVote& b) {
    if (a.size != b.size) return a.size < b.size;
    if (a.label != b.label) return a.label < b.label;
    return a.scores < b.scores;
  });
  VoteRecord r;
  r.counts.assign(static_cast<std::size_t>(classes), 0);
  r.score_sums.assign(static_cast<std::size_t>(classes), 0.0);
  for (const auto& v : votes) {
    if (v.label < 0 || v.label >= classes) throw ValidationError("vote label out of range");
    if (v.scores.size() != static_cast<std::size_t>(classes)) throw ValidationError("vote has wrong score count");
    ++r.counts[static_cast<std::size_t>(v.label)];
    for (int c = 0; c < classes; ++c) r.score_sums[static_cast<std::size_t>(c)] += v.scores[static_cast<std::size_t>(c)];
  }
  r.winner = 0;
  for (int c = 1; c < classes; ++c) {
    const auto i = static_cast<std::size_t>(c);
    const auto w = static_cast<std::size_t>(r.winner);
    if (r.counts[i] > r.counts[w] || (r.counts[i] == r.counts[w] && r.score_sums[i] > r.score_sums[w])) r.winner = c;
  }
  r.per_scale = std::move(votes);
  return r;
}

Prediction single_scale_label(const FeatureStack& stack, Pixel center, int size, const SvmModel& model,
                              const DescriptorConfig& config) {
  return predict(model, extract_descriptor(stack, SampleWindow::of(PatchSpec{center, size}), config));
}

VoteRecord multiscale_label(const FeatureStack& stack, Pixel center, const ScaleSet& scales,
                            const ClassifierSet& models, const DescriptorConfig& config) {
  scales.validate();
  if (!full_rect(stack.image_size).contains(center)) throw ValidationError("vote centre lies outside the image");
  std::vector<ScaleVote> votes;
  int classes = 0;
  for (int size : scales.sizes) {
    const SvmModel& model = models.for_scale(size);
    classes = model.classes;
    auto p = single_scale_label(stack, center, size, model, config);
    votes.push_back({size, p.label, std::move(p.scores)});
  }
  return tally_votes(std::move(votes), classes);
}

}  // namespace hypermaps
