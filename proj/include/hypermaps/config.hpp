#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypermaps/descriptor.hpp"
#include "hypermaps/multiscale.hpp"
#include "hypermaps/svm.hpp"
#include "hypermaps/synthetic.hpp"

namespace hypermaps {

enum class ClassifierMode { shared, per_scale };

struct AblationSpec {
  std::vector<double> sigma2_values{50, 100, 200, 300, 500, 1000};
  /// Patch size used for the sigma2 sweep.
  int sigma2_scale = 70;
  std::vector<ScaleSet> scale_sets{{{10}}, {{30}}, {{50}}, {{70}}, {{90}}, {{30, 50, 70}}, {{10, 30, 50, 70, 90}}};
};

/// Every knob of a run. `fingerprint_json` holds exactly the keys that
/// influence results; `threads`, `synthetic` and `ablation` are excluded.
struct PipelineConfig {
  DescriptorConfig descriptor;
  ScaleSet scales;
  bool augmentation = true;
  int base_size = 30;
  Pixel offset{10, 10};
  std::uint64_t seed = 0;
  SvmHyperparams svm;
  ClassifierMode classifier_mode = ClassifierMode::shared;
  int threads = 0;
  SyntheticSpec synthetic;
  AblationSpec ablation;

  void validate() const;
  SvmHyperparams svm_hyperparams() const {
    SvmHyperparams h = svm;
    h.seed = seed;
    return h;
  }
};

nlohmann::json fingerprint_json(const PipelineConfig& config);
/// 16 hex digits (FNV-1a of the canonical fingerprint JSON).
std::string fingerprint(const PipelineConfig& config);

nlohmann::json config_to_json(const PipelineConfig& config);
/// Missing keys keep their defaults. Accepts a report file too, reading its
/// "config" object.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace hypermaps
