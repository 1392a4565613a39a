#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hypermaps/descriptor.hpp"
#include "hypermaps/errors.hpp"

namespace hypermaps {

struct SvmHyperparams {
  /// Soft-margin constant of 1/2 |w|^2 + C sum_i hinge_i.
  double c = 1.0;
  int epochs = 50;
  std::uint64_t seed = 0;

  friend bool operator==(const SvmHyperparams&, const SvmHyperparams&) = default;
};

/// Per-dimension standardization x' = (x - mean) / scale. Constant
/// dimensions keep scale 1.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> scale;

  static Scaler fit(std::span<const std::span<const float>> rows);
  double apply(std::size_t d, float x) const { return (static_cast<double>(x) - mean[d]) / scale[d]; }

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

/// One-vs-rest linear SVM. Scores are w_c . x' + b_c on standardized input.
struct SvmModel {
  int classes = 0;
  int dim = 0;
  std::vector<float> weights;  // classes x dim, row-major
  std::vector<float> biases;   // classes
  Scaler scaler;
  SvmHyperparams hyperparams;
  /// Primal objective of each one-vs-rest problem after every epoch, as
  /// raw iterate values and as the retained checkpoint (best so far).
  std::vector<std::vector<double>> epoch_objective;
  std::vector<std::vector<double>> checkpoint_objective;

  std::span<const float> class_weights(int c) const {
    return std::span<const float>(weights).subspan(static_cast<std::size_t>(c) * dim, static_cast<std::size_t>(dim));
  }
};

struct LabeledDescriptor {
  Descriptor descriptor;
  int label = 0;
};

struct Prediction {
  int label = 0;
  std::vector<double> scores;
};

/// Trains one-vs-rest hinge-loss SVMs by epoch-wise stochastic subgradient
/// descent (step 1 / (lambda t), lambda = 1 / (C n), bias as an extra
/// constant feature). Deterministic in (sample order, hyperparams). The
/// returned weights are the lowest-objective epoch checkpoint.
/// `classes` = 0 uses max label + 1.
SvmModel train(std::span<const LabeledDescriptor> samples, const SvmHyperparams& hyperparams, int classes = 0);

/// Ties go to the lowest class index.
Prediction predict(const SvmModel& model, std::span<const float> descriptor);
inline Prediction predict(const SvmModel& model, const Descriptor& d) { return predict(model, d.values); }

/// lambda/2 |w|^2 + mean hinge of one one-vs-rest problem for the stored
/// (float) parameters, lambda = 1 / (C n). Independent of the training loop.
double ovr_objective(const SvmModel& model, int cls, std::span<const LabeledDescriptor> samples);

class ModelFileError : public DataError {
 public:
  using DataError::DataError;
};

/// A classifier shared by all scales (scale 0) or one per patch size.
struct ClassifierSet {
  struct Entry {
    int scale = 0;
    SvmModel model;
  };
  std::vector<Entry> models;

  const SvmModel& for_scale(int scale) const;
};

// Container: "HMSV", u32 version, u32 header length, JSON header (classes,
// dim, hyperparams, scaler per model), then per model a weights TensorFile
// (1, K, D) and a biases TensorFile (K). The header carries an FNV-1a
// checksum of the tensor payload.
void save_models(const std::filesystem::path& path, const ClassifierSet& set);
ClassifierSet load_models(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const SvmModel& model);
SvmModel load_model(const std::filesystem::path& path);

}  // namespace hypermaps
