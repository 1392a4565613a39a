#pragma once

#include <vector>

#include "hypermaps/descriptor.hpp"
#include "hypermaps/svm.hpp"

namespace hypermaps {

/// Patch sizes evaluated around one centre; strictly increasing, each >= 1.
struct ScaleSet {
  std::vector<int> sizes{30, 50, 70};

  void validate() const;
  friend bool operator==(const ScaleSet&, const ScaleSet&) = default;
};

struct ScaleVote {
  int size = 0;
  int label = 0;
  std::vector<double> scores;
};

struct VoteRecord {
  std::vector<ScaleVote> per_scale;
  std::vector<int> counts;
  /// Per-label decision scores summed over scales (tie-break key).
  std::vector<double> score_sums;
  int winner = 0;
};

/// Majority vote over per-scale labels. Equal counts go to the larger
/// summed decision score, then to the lowest label. Independent of the
/// order of `votes`.
VoteRecord tally_votes(std::vector<ScaleVote> votes, int classes);

/// Label of the patch of `size` around `center` under `model`.
Prediction single_scale_label(const FeatureStack& stack, Pixel center, int size, const SvmModel& model,
                              const DescriptorConfig& config);

VoteRecord multiscale_label(const FeatureStack& stack, Pixel center, const ScaleSet& scales,
                            const ClassifierSet& models, const DescriptorConfig& config);

}  // namespace hypermaps
