#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypermaps/augmentation.hpp"
#include "hypermaps/config.hpp"
#include "hypermaps/manifest.hpp"
#include "hypermaps/masks.hpp"

namespace hypermaps {

// ---------------------------------------------------------------------------
// Training set

struct TrainingSet {
  std::vector<LabeledDescriptor> samples;
  /// The variant behind every sample, same order.
  std::vector<PatchSample> patches;
  /// Source patches per class before augmentation.
  std::array<int, kNumLabels> class_counts{};
  std::vector<std::string> image_ids;
};

/// Grid cells (stride `offset`) whose centre pixel is labelled become one
/// patch of `patch_size` each, shifted inwards when it would cross the image
/// border; with augmentation every patch expands to 18 variants.
TrainingSet build_training_set(const DatasetManifest& manifest, const std::string& fold, const PipelineConfig& config,
                               int patch_size);

/// Trains the classifier(s) of `config` on one fold. `log` may be null.
ClassifierSet train_fold(const DatasetManifest& manifest, const std::string& fold, const PipelineConfig& config,
                         std::ostream* log = nullptr, std::vector<std::string>* train_ids = nullptr);

// ---------------------------------------------------------------------------
// Sliding-window labelling

/// Cell [x0, x1) x [y0, y1) of the evaluation grid with its vote centre.
struct GridCell {
  Rect area;
  Pixel center;
};

/// Grid cells of stride `offset` covering the image; the centre is
/// (x0 + w/2, y0 + h/2).
std::vector<GridCell> grid_cells(ImageSize image, Pixel offset);

struct LabelingResult {
  LabelMask labels;
  int evaluations = 0;
  /// Set when the change mask has no changed pixel.
  bool empty_change_mask = false;
};

/// Votes once per grid cell containing a changed pixel and paints the
/// cell's changed pixels with the winner; everything else stays 255.
LabelingResult label_change_regions(const FeatureStack& stack, const ChangeMask& change, const ClassifierSet& models,
                                    const ScaleSet& scales, Pixel offset, const DescriptorConfig& config,
                                    int threads = 0);

// ---------------------------------------------------------------------------
// Evaluation

struct EvalReport {
  std::string fold;
  /// confusion[truth][pred] in pixels.
  std::array<std::array<long long, kNumLabels>, kNumLabels> confusion{};
  /// Labelled truth pixels predicted as 255.
  std::array<long long, kNumLabels> unassigned{};
  std::array<long long, kNumLabels> class_pixels{};
  long long total = 0;
  std::array<double, kNumLabels> per_class_accuracy{};  // %
  double overall_accuracy = 0.0;                         // %
  nlohmann::json config = nlohmann::json::object();
  std::string fingerprint;

  /// Adds another image's counts and refreshes the accuracies.
  void merge(const EvalReport& other);
  void finalize();
};

/// Pixel accuracy over truth != 255.
EvalReport evaluate(const LabelMask& pred, const LabelMask& truth);

nlohmann::json report_to_json(const EvalReport& report);

struct ReportRow {
  std::string approach;
  double t0 = 0.0;
  double t1 = 0.0;
};

/// "Approach  t0 (%)  t1 (%)" table.
std::string render_table(const std::vector<ReportRow>& rows);
std::string render_csv(const std::vector<ReportRow>& rows);
/// Name of the approach a config describes, e.g. "Multi-scale Weighted Hypermaps".
std::string approach_name(const PipelineConfig& config);

// ---------------------------------------------------------------------------
// Runs

struct FoldRun {
  EvalReport report;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::map<std::string, LabelMask> predictions;
};

/// Labels every entry of `fold` with `models` and scores against its label masks.
FoldRun test_fold(const DatasetManifest& manifest, const std::string& fold, const ClassifierSet& models,
                  const PipelineConfig& config, std::ostream* log = nullptr);

struct CrossTimeResult {
  FoldRun t0;  // trained on t1
  FoldRun t1;  // trained on t0
};

/// t0 is tested with a model trained on t1 and vice versa. The first log
/// line carries the config fingerprint.
CrossTimeResult cross_time_run(const DatasetManifest& manifest, const PipelineConfig& config,
                               std::ostream* log = nullptr);

/// Full text report of a cross-time run.
std::string render_run_report(const CrossTimeResult& run, const PipelineConfig& config);
nlohmann::json run_to_json(const CrossTimeResult& run, const PipelineConfig& config);

// ---------------------------------------------------------------------------
// Overlay

/// car blue, building green, rubble red; 255 passes the base image through
/// (black without one). Blended at alpha 0.5 over a base image.
RgbImage render_overlay(const LabelMask& labels, const RgbImage* base = nullptr);

// ---------------------------------------------------------------------------
// Ablation

struct AblationRow {
  std::string knob;
  std::string setting;
  double t0 = 0.0;
  double t1 = 0.0;
};

/// Sweeps weighted on/off, augmentation on/off, the scale sets and the sigma2
/// values around `base`. Classifiers are reused across runs that train
/// identically.
std::vector<AblationRow> run_ablation(const DatasetManifest& manifest, const PipelineConfig& base,
                                      std::ostream* log = nullptr);
std::string render_ablation_table(const std::vector<AblationRow>& rows);
std::string render_ablation_csv(const std::vector<AblationRow>& rows);

// ---------------------------------------------------------------------------
// Synthetic datasets

/// Writes `scenes_per_fold` scenes for t0 and t1 (tensors, masks, manifest.json)
/// under `dir` and returns the manifest.
DatasetManifest write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticSpec& spec,
                                        int scenes_per_fold, std::uint64_t seed);

}  // namespace hypermaps
