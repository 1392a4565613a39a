#include "hypermaps/config.hpp"

#include <fstream>
#include <sstream>

#include "hypermaps/errors.hpp"

namespace hypermaps {

using nlohmann::json;

void PipelineConfig::validate() const {
  if (descriptor.layout.segments.empty()) throw ValidationError("layout is empty");
  if (descriptor.weighted && !(descriptor.sigma2 > 0.0)) throw ValidationError("sigma2 must be > 0");
  scales.validate();
  if (base_size < 1) throw ValidationError("base_size must be >= 1");
  if (augmentation && base_size < 2) throw ValidationError("augmentation needs base_size >= 2");
  if (offset.x < 1 || offset.y < 1) throw ValidationError("offset must be positive");
  if (!(svm.c > 0.0) || svm.epochs < 1) throw ValidationError("svm.c must be > 0 and svm.epochs >= 1");
  if (threads < 0) throw ValidationError("threads must be >= 0");
}

json fingerprint_json(const PipelineConfig& c) {
  return {{"layout", c.descriptor.layout},
          {"descriptor", c.descriptor.kind == DescriptorKind::hypermap ? "hypermap" : "hypercolumn"},
          {"sigma2", c.descriptor.sigma2},
          {"weighted", c.descriptor.weighted},
          {"normalized", c.descriptor.normalized},
          {"scales", c.scales.sizes},
          {"augmentation", c.augmentation},
          {"base_size", c.base_size},
          {"offset", {c.offset.x, c.offset.y}},
          {"seed", c.seed},
          {"svm", {{"c", c.svm.c}, {"epochs", c.svm.epochs}}},
          {"classifier_mode", c.classifier_mode == ClassifierMode::shared ? "shared" : "per_scale"}};
}

std::string fingerprint(const PipelineConfig& config) {
  const std::string text = fingerprint_json(config).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) h = (h ^ ch) * 1099511628211ULL;
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

json config_to_json(const PipelineConfig& c) {
  json j = fingerprint_json(c);
  j["threads"] = c.threads;
  j["synthetic"] = c.synthetic;
  json sets = json::array();
  for (const auto& s : c.ablation.scale_sets) sets.push_back(s.sizes);
  j["ablation"] = {{"sigma2_values", c.ablation.sigma2_values},
                   {"sigma2_scale", c.ablation.sigma2_scale},
                   {"scale_sets", sets}};
  return j;
}

PipelineConfig config_from_json(const json& input) {
  const json& j = input.contains("config") && input["config"].is_object() ? input["config"] : input;
  PipelineConfig c;
  try {
    if (j.contains("layout")) c.descriptor.layout = j["layout"].get<DescriptorLayout>();
    if (j.contains("descriptor")) {
      const auto kind = j["descriptor"].get<std::string>();
      if (kind == "hypermap") {
        c.descriptor.kind = DescriptorKind::hypermap;
      } else if (kind == "hypercolumn") {
        c.descriptor.kind = DescriptorKind::hypercolumn;
      } else {
        throw ValidationError("descriptor must be 'hypermap' or 'hypercolumn'");
      }
    }
    c.descriptor.sigma2 = j.value("sigma2", c.descriptor.sigma2);
    c.descriptor.weighted = j.value("weighted", c.descriptor.weighted);
    c.descriptor.normalized = j.value("normalized", c.descriptor.normalized);
    if (j.contains("scales")) c.scales.sizes = j["scales"].get<std::vector<int>>();
    c.augmentation = j.value("augmentation", c.augmentation);
    c.base_size = j.value("base_size", c.base_size);
    if (j.contains("offset")) c.offset = {j["offset"].at(0).get<int>(), j["offset"].at(1).get<int>()};
    c.seed = j.value("seed", c.seed);
    if (j.contains("svm")) {
      c.svm.c = j["svm"].value("c", c.svm.c);
      c.svm.epochs = j["svm"].value("epochs", c.svm.epochs);
    }
    if (j.contains("classifier_mode")) {
      const auto mode = j["classifier_mode"].get<std::string>();
      if (mode == "shared") {
        c.classifier_mode = ClassifierMode::shared;
      } else if (mode == "per_scale") {
        c.classifier_mode = ClassifierMode::per_scale;
      } else {
        throw ValidationError("classifier_mode must be 'shared' or 'per_scale'");
      }
    }
    c.threads = j.value("threads", c.threads);
    if (j.contains("synthetic")) c.synthetic = j["synthetic"].get<SyntheticSpec>();
    if (j.contains("ablation")) {
      const auto& a = j["ablation"];
      c.ablation.sigma2_values = a.value("sigma2_values", c.ablation.sigma2_values);
      c.ablation.sigma2_scale = a.value("sigma2_scale", c.ablation.sigma2_scale);
      if (a.contains("scale_sets")) {
        c.ablation.scale_sets.clear();
        for (const auto& s : a["scale_sets"]) c.ablation.scale_sets.push_back({s.get<std::vector<int>>()});
      }
    }
  } catch (const json::exception& ex) {
    throw ValidationError(std::string("invalid configuration: ") + ex.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& ex) {
    throw ValidationError("cannot parse config " + path.string() + ": " + ex.what());
  }
}

}  // namespace hypermaps
