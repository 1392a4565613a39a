#include "hypermaps/svm.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <thread>

#include "hypermaps/rng.hpp"

namespace hypermaps {
namespace {

double dot(const float* x, const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i];
  return acc;
}

// Standardized design matrix restricted to dimensions with non-zero
// variance; constant dimensions are zero for every sample and never move
// away from zero weight, so dropping them leaves the optimum unchanged.
// The last column is the constant bias feature.
struct Design {
  std::vector<std::size_t> active;
  std::size_t cols = 0;
  std::vector<float> x;

  const float* row(std::size_t i) const { return x.data() + i * cols; }
};

Design standardize(std::span<const LabeledDescriptor> samples, const Scaler& scaler, const std::vector<bool>& constant) {
  Design d;
  for (std::size_t j = 0; j < constant.size(); ++j)
    if (!constant[j]) d.active.push_back(j);
  d.cols = d.active.size() + 1;
  d.x.resize(samples.size() * d.cols);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& v = samples[i].descriptor.values;
    float* out = d.x.data() + i * d.cols;
    for (std::size_t k = 0; k < d.active.size(); ++k) {
      out[k] = static_cast<float>(scaler.apply(d.active[k], v[d.active[k]]));
    }
    out[d.active.size()] = 1.0f;
  }
  return d;
}

struct OvrResult {
  std::vector<double> w;  // active dims + bias
  std::vector<double> raw;
  std::vector<double> checkpoint;
};

double objective(const Design& d, const std::vector<int>& y, const std::vector<double>& w, double lambda) {
  double norm2 = 0.0;
  for (double v : w) norm2 += v * v;
  double hinge = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    hinge += std::max(0.0, 1.0 - y[i] * dot(d.row(i), w.data(), d.cols));
  }
  return 0.5 * lambda * norm2 + hinge / static_cast<double>(y.size());
}

OvrResult train_ovr(const Design& d, const std::vector<int>& y, const SvmHyperparams& hp, std::uint64_t stream) {
  const std::size_t n = y.size();
  const double lambda = 1.0 / (hp.c * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);
  // w = a * v keeps the shrink step O(1).
  std::vector<double> v(d.cols, 0.0);
  double a = 1.0;
  std::uint64_t t = 0;
  Rng rng(mix_seed(hp.seed, stream));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  OvrResult r;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> w(d.cols);
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double margin = y[i] * a * dot(d.row(i), v.data(), d.cols);
      a *= 1.0 - 1.0 / static_cast<double>(t);
      if (a == 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        a = 1.0;
      } else if (a < 1e-9) {
        for (double& x : v) x *= a;
        a = 1.0;
      }
      if (margin < 1.0) {
        const double step = eta * y[i] / a;
        const float* x = d.row(i);
        for (std::size_t k = 0; k < d.cols; ++k) v[k] += step * x[k];
      }
    }
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    const double norm = a * std::sqrt(norm2);
    if (norm > radius) a *= radius / norm;

    for (std::size_t k = 0; k < d.cols; ++k) w[k] = a * v[k];
    const double obj = objective(d, y, w, lambda);
    r.raw.push_back(obj);
    if (obj < best) {
      best = obj;
      r.w = w;
    }
    r.checkpoint.push_back(best);
  }
  if (r.w.empty()) r.w.assign(d.cols, 0.0);
  return r;
}

}  // namespace

Scaler Scaler::fit(std::span<const std::span<const float>> rows) {
  Scaler s;
  if (rows.empty()) return s;
  const std::size_t dim = rows.front().size();
  s.mean.assign(dim, 0.0);
  s.scale.assign(dim, 1.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < dim; ++j) s.mean[j] += r[j];
  for (auto& m : s.mean) m /= static_cast<double>(rows.size());
  std::vector<double> var(dim, 0.0);
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double dev = r[j] - s.mean[j];
      var[j] += dev * dev;
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(rows.size()));
    if (sd > 1e-12 * std::max(1.0, std::abs(s.mean[j]))) s.scale[j] = sd;
  }
  return s;
}

SvmModel train(std::span<const LabeledDescriptor> samples, const SvmHyperparams& hp, int classes) {
  if (samples.empty()) throw ValidationError("no training samples");
  if (!(hp.c > 0.0) || hp.epochs < 1) throw ValidationError("SVM needs C > 0 and at least one epoch");
  const std::size_t dim = samples.front().descriptor.values.size();
  std::set<int> labels;
  for (const auto& s : samples) {
    if (s.descriptor.values.size() != dim) throw ValidationError("training descriptors differ in length");
    if (s.label < 0) throw ValidationError("negative training label");
    for (float v : s.descriptor.values)
      if (!std::isfinite(v)) throw ValidationError("training descriptor contains a non-finite value");
    labels.insert(s.label);
  }
  if (labels.size() < 2) throw ValidationError("training needs at least two classes, got one");
  if (classes == 0) classes = *labels.rbegin() + 1;
  if (*labels.rbegin() >= classes) throw ValidationError("training label exceeds the class count");

  std::vector<std::span<const float>> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.emplace_back(s.descriptor.values);
  SvmModel model;
  model.classes = classes;
  model.dim = static_cast<int>(dim);
  model.hyperparams = hp;
  model.scaler = Scaler::fit(rows);

  std::vector<bool> constant(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const float first = rows.front()[j];
    constant[j] = std::all_of(rows.begin(), rows.end(), [&](const auto& r) { return r[j] == first; });
  }
  const Design design = standardize(samples, model.scaler, constant);

  std::vector<OvrResult> results(static_cast<std::size_t>(classes));
  auto run = [&](int c) {
    std::vector<int> y(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) y[i] = samples[i].label == c ? 1 : -1;
    results[static_cast<std::size_t>(c)] = train_ovr(design, y, hp, static_cast<std::uint64_t>(c));
  };
  // The one-vs-rest problems are independent; each is deterministic on its own.
  if (std::thread::hardware_concurrency() > 1) {
    std::vector<std::jthread> workers;
    for (int c = 0; c < classes; ++c) workers.emplace_back(run, c);
  } else {
    for (int c = 0; c < classes; ++c) run(c);
  }

  model.weights.assign(static_cast<std::size_t>(classes) * dim, 0.0f);
  model.biases.assign(static_cast<std::size_t>(classes), 0.0f);
  for (int c = 0; c < classes; ++c) {
    const auto& r = results[static_cast<std::size_t>(c)];
    for (std::size_t k = 0; k < design.active.size(); ++k) {
      model.weights[static_cast<std::size_t>(c) * dim + design.active[k]] = static_cast<float>(r.w[k]);
    }
    model.biases[static_cast<std::size_t>(c)] = static_cast<float>(r.w.back());
    model.epoch_objective.push_back(r.raw);
    model.checkpoint_objective.push_back(r.checkpoint);
  }
  return model;
}

Prediction predict(const SvmModel& model, std::span<const float> descriptor) {
  if (static_cast<int>(descriptor.size()) != model.dim) {
    throw ValidationError("descriptor length " + std::to_string(descriptor.size()) + " does not match model dim " +
                          std::to_string(model.dim));
  }
  std::vector<double> x(descriptor.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = model.scaler.apply(j, descriptor[j]);
  Prediction p;
  p.scores.resize(static_cast<std::size_t>(model.classes));
  for (int c = 0; c < model.classes; ++c) {
    const auto w = model.class_weights(c);
    double s = model.biases[static_cast<std::size_t>(c)];
    for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
    p.scores[static_cast<std::size_t>(c)] = s;
    if (s > p.scores[static_cast<std::size_t>(p.label)]) p.label = c;
  }
  return p;
}

double ovr_objective(const SvmModel& model, int cls, std::span<const LabeledDescriptor> samples) {
  const double lambda = 1.0 / (model.hyperparams.c * static_cast<double>(samples.size()));
  double norm2 = static_cast<double>(model.biases[static_cast<std::size_t>(cls)]) *
                 model.biases[static_cast<std::size_t>(cls)];
  for (float w : model.class_weights(cls)) norm2 += static_cast<double>(w) * w;
  double hinge = 0.0;
  for (const auto& s : samples) {
    const double y = s.label == cls ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - y * predict(model, s.descriptor).scores[static_cast<std::size_t>(cls)]);
  }
  return 0.5 * lambda * norm2 + hinge / static_cast<double>(samples.size());
}

const SvmModel& ClassifierSet::for_scale(int scale) const {
  for (const auto& e : models)
    if (e.scale == scale) return e.model;
  for (const auto& e : models)
    if (e.scale == 0) return e.model;
  throw ValidationError("no classifier for patch size " + std::to_string(scale));
}

}  // namespace hypermaps
