// Command-line front end: synth, validate, train, predict, eval, run, render, ablate.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hypermaps/errors.hpp"
#include "hypermaps/pipeline.hpp"
#include "hypermaps/tensor_file.hpp"

namespace fs = std::filesystem;
using namespace hypermaps;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitData = 3;

// Optional overrides of config keys; unset options leave the config alone.
struct ConfigOptions {
  std::string config_path;
  std::optional<double> sigma2;
  std::optional<std::vector<int>> scales;
  std::optional<bool> weighted;
  std::optional<bool> normalized;
  std::optional<bool> augmentation;
  std::optional<int> base_size;
  std::optional<std::vector<int>> offset;
  std::optional<std::uint64_t> seed;
  std::optional<double> svm_c;
  std::optional<int> svm_epochs;
  std::optional<std::string> classifier_mode;
  std::optional<std::string> descriptor;
  std::optional<int> threads;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file (a report.json works too)");
    app->add_option("--sigma2", sigma2, "Gaussian variance in px^2");
    app->add_option("--scales", scales, "Patch sizes, strictly increasing");
    app->add_flag("--weighted,!--no-weighted", weighted, "Gaussian-weighted accumulation");
    app->add_flag("--normalized,!--no-normalized", normalized, "Normalize weights to sum to one");
    app->add_flag("--augmentation,!--no-augmentation", augmentation, "x18 flip/division augmentation");
    app->add_option("--base-size", base_size, "Training patch size");
    app->add_option("--offset", offset, "Grid stride x y")->expected(2);
    app->add_option("--seed", seed, "Training seed");
    app->add_option("--svm-c", svm_c, "SVM soft-margin constant");
    app->add_option("--svm-epochs", svm_epochs, "SVM epochs");
    app->add_option("--classifier-mode", classifier_mode, "shared | per_scale");
    app->add_option("--descriptor", descriptor, "hypermap | hypercolumn");
    app->add_option("--threads", threads, "Worker threads (0 = all cores)");
  }

  PipelineConfig resolve() const {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ValidationError("cannot open config " + config_path);
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& ex) {
        throw ValidationError("cannot parse config " + config_path + ": " + ex.what());
      }
      if (j.contains("config") && j["config"].is_object()) j = j["config"];
    }
    if (sigma2) j["sigma2"] = *sigma2;
    if (scales) j["scales"] = *scales;
    if (weighted) j["weighted"] = *weighted;
    if (normalized) j["normalized"] = *normalized;
    if (augmentation) j["augmentation"] = *augmentation;
    if (base_size) j["base_size"] = *base_size;
    if (offset) j["offset"] = *offset;
    if (seed) j["seed"] = *seed;
    if (svm_c) j["svm"]["c"] = *svm_c;
    if (svm_epochs) j["svm"]["epochs"] = *svm_epochs;
    if (classifier_mode) j["classifier_mode"] = *classifier_mode;
    if (descriptor) j["descriptor"] = *descriptor;
    if (threads) j["threads"] = *threads;
    return config_from_json(j);
  }
};

void write_text(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::as_bytes(std::span(text.data(), text.size())));
}

DatasetManifest checked_manifest(const std::string& path, const PipelineConfig& config) {
  DatasetManifest m = load_manifest(path);
  const auto violations = validate_manifest(m, config.descriptor.layout);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "manifest has " << violations.size() << " violation(s):";
    for (const auto& v : violations) os << "\n  entry " << v.entry_index << " " << v.field << ": " << v.message;
    throw DataError(os.str());
  }
  return m;
}

// Writes every line to stderr and to an optional log file.
class TeeLog : public std::ostringstream {
 public:
  void flush_to(const fs::path* file) {
    std::cerr << str();
    if (file) write_text(*file, str());
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypermap-based semantic change detection"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic two-fold dataset");
  std::string synth_out;
  int scenes = 10;
  std::uint64_t synth_seed = 1;
  std::optional<double> noise, signal;
  std::optional<bool> concentration;
  std::optional<int> height, width;
  ConfigOptions synth_cfg;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--scenes", scenes, "Scenes per fold");
  synth->add_option("--data-seed", synth_seed, "Scene seed");
  synth->add_option("--noise", noise, "Per-element noise std");
  synth->add_option("--signal", signal, "Class signal amplitude");
  synth->add_flag("--concentration,!--no-concentration", concentration, "Centre-concentrated object signal");
  synth->add_option("--height", height, "Image height");
  synth->add_option("--width", width, "Image width");
  synth->add_option("--config", synth_cfg.config_path, "Config file whose 'synthetic' block is used");

  // validate
  auto* validate = app.add_subcommand("validate", "Check a manifest against the descriptor layout");
  std::string manifest_path;
  ConfigOptions validate_cfg;
  validate->add_option("--manifest", manifest_path, "Manifest JSON")->required();
  validate_cfg.attach(validate);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train classifier(s) on one fold");
  std::string fold = kFoldT0;
  std::string model_path;
  ConfigOptions train_cfg;
  train_cmd->add_option("--manifest", manifest_path, "Manifest JSON")->required();
  train_cmd->add_option("--fold", fold, "Training fold (t0 | t1)");
  train_cmd->add_option("--out", model_path, "Model file")->required();
  train_cfg.attach(train_cmd);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Label the change regions of one fold");
  std::string out_dir;
  ConfigOptions predict_cfg;
  predict_cmd->add_option("--manifest", manifest_path, "Manifest JSON")->required();
  predict_cmd->add_option("--fold", fold, "Fold to label (t0 | t1)");
  predict_cmd->add_option("--model", model_path, "Model file")->required();
  predict_cmd->add_option("--out", out_dir, "Directory for <image_id>.png label masks")->required();
  predict_cfg.attach(predict_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Score predicted label masks against the truth");
  std::string pred_dir;
  ConfigOptions eval_cfg;
  eval_cmd->add_option("--manifest", manifest_path, "Manifest JSON")->required();
  eval_cmd->add_option("--fold", fold, "Fold (t0 | t1)");
  eval_cmd->add_option("--pred-dir", pred_dir, "Directory of <image_id>.png predictions")->required();
  eval_cmd->add_option("--out", out_dir, "Directory for report.json");
  eval_cfg.attach(eval_cmd);

  // run
  auto* run_cmd = app.add_subcommand("run", "Cross-time train/test on both folds");
  bool save_predictions = false;
  ConfigOptions run_cfg;
  run_cmd->add_option("--manifest", manifest_path, "Manifest JSON")->required();
  run_cmd->add_option("--out", out_dir, "Output directory")->required();
  run_cmd->add_flag("--save-predictions", save_predictions, "Write label masks and overlays per image");
  run_cfg.attach(run_cmd);

  // render
  auto* render_cmd = app.add_subcommand("render", "Colour a label mask, optionally over an RGB image");
  std::string labels_path, base_path, render_out;
  render_cmd->add_option("--labels", labels_path, "Label mask PNG")->required();
  render_cmd->add_option("--base", base_path, "Base RGB PNG");
  render_cmd->add_option("--out", render_out, "Output PNG")->required();

  // ablate
  auto* ablate_cmd = app.add_subcommand("ablate", "Sweep weighting, augmentation, scale sets and sigma2");
  ConfigOptions ablate_cfg;
  ablate_cmd->add_option("--manifest", manifest_path, "Manifest JSON")->required();
  ablate_cmd->add_option("--out", out_dir, "Output directory")->required();
  ablate_cfg.attach(ablate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*synth) {
      SyntheticSpec spec = synth_cfg.config_path.empty() ? SyntheticSpec{} : load_config(synth_cfg.config_path).synthetic;
      if (noise) spec.noise = *noise;
      if (signal) spec.signal = *signal;
      if (concentration) spec.center_concentration = *concentration;
      if (height) spec.image_size.height = *height;
      if (width) spec.image_size.width = *width;
      const auto m = write_synthetic_dataset(synth_out, spec, scenes, synth_seed);
      std::cout << "wrote " << m.entries.size() << " entries to " << (fs::path(synth_out) / "manifest.json").string()
                << '\n';
    } else if (*validate) {
      const PipelineConfig config = validate_cfg.resolve();
      const DatasetManifest m = load_manifest(manifest_path);
      const auto violations = validate_manifest(m, config.descriptor.layout);
      for (const auto& v : violations) std::cout << "entry " << v.entry_index << " " << v.field << ": " << v.message << '\n';
      std::cout << violations.size() << " violation(s)\n";
      return violations.empty() ? 0 : kExitValidation;
    } else if (*train_cmd) {
      const PipelineConfig config = train_cfg.resolve();
      const DatasetManifest m = checked_manifest(manifest_path, config);
      TeeLog log;
      log << "fingerprint=" << fingerprint(config) << " config=" << fingerprint_json(config).dump() << '\n';
      const ClassifierSet models = train_fold(m, fold, config, &log);
      save_models(model_path, models);
      log.flush_to(nullptr);
    } else if (*predict_cmd) {
      const PipelineConfig config = predict_cfg.resolve();
      const DatasetManifest m = checked_manifest(manifest_path, config);
      const ClassifierSet models = load_models(model_path);
      TeeLog log;
      log << "fingerprint=" << fingerprint(config) << " config=" << fingerprint_json(config).dump() << '\n';
      fs::create_directories(out_dir);
      for (const ManifestEntry* e : m.fold(fold)) {
        if (!e->change_mask_path) throw DataError("entry '" + e->image_id + "' has no change mask");
        const auto change = read_change_mask(m.resolve(*e->change_mask_path));
        const auto stack = load_stack(m, *e, config.descriptor.layout);
        const auto r = label_change_regions(stack, change, models, config.scales, config.offset, config.descriptor,
                                            config.threads);
        log << "predict image=" << e->image_id << " evaluations=" << r.evaluations
            << (r.empty_change_mask ? " warning=empty_change_mask" : "") << '\n';
        write_label_mask(fs::path(out_dir) / (e->image_id + ".png"), r.labels);
      }
      log.flush_to(nullptr);
    } else if (*eval_cmd) {
      const PipelineConfig config = eval_cfg.resolve();
      const DatasetManifest m = load_manifest(manifest_path);
      EvalReport report;
      report.fold = fold;
      for (const ManifestEntry* e : m.fold(fold)) {
        if (!e->label_mask_path) throw DataError("entry '" + e->image_id + "' has no label mask");
        const auto truth = read_label_mask(m.resolve(*e->label_mask_path));
        if (std::all_of(truth.data.begin(), truth.data.end(), [](auto v) { return v == kUnlabeled; })) continue;
        const auto pred = read_label_mask(fs::path(pred_dir) / (e->image_id + ".png"));
        report.merge(evaluate(pred, truth));
      }
      if (report.total == 0) throw ValidationError("fold '" + fold + "' has no labelled pixels");
      report.config = fingerprint_json(config);
      report.fingerprint = fingerprint(config);
      std::cout << "overall " << report.overall_accuracy << "%\n";
      for (int c = 0; c < kNumLabels; ++c) std::cout << kLabelNames[c] << ' ' << report.per_class_accuracy[c] << "%\n";
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text(fs::path(out_dir) / "report.json", report_to_json(report).dump(2) + "\n");
      }
    } else if (*run_cmd) {
      const PipelineConfig config = run_cfg.resolve();
      const DatasetManifest m = checked_manifest(manifest_path, config);
      TeeLog log;
      const auto result = cross_time_run(m, config, &log);
      fs::create_directories(out_dir);
      const fs::path out(out_dir);
      const auto text = render_run_report(result, config);
      write_text(out / "report.txt", text);
      write_text(out / "report.csv",
                 render_csv({{approach_name(config), result.t0.report.overall_accuracy, result.t1.report.overall_accuracy}}));
      write_text(out / "report.json", run_to_json(result, config).dump(2) + "\n");
      if (save_predictions) {
        fs::create_directories(out / "predictions");
        for (const FoldRun* f : {&result.t0, &result.t1}) {
          for (const auto& [id, mask] : f->predictions) {
            write_label_mask(out / "predictions" / (id + ".png"), mask);
            write_png_rgb(out / "predictions" / (id + "_overlay.png"), render_overlay(mask));
          }
        }
      }
      const fs::path log_file = out / "run.log";
      log.flush_to(&log_file);
      std::cout << text;
    } else if (*render_cmd) {
      const LabelMask labels = read_label_mask(labels_path);
      if (base_path.empty()) {
        write_png_rgb(render_out, render_overlay(labels));
      } else {
        const RgbImage base = read_png_rgb(base_path);
        write_png_rgb(render_out, render_overlay(labels, &base));
      }
    } else if (*ablate_cmd) {
      const PipelineConfig config = ablate_cfg.resolve();
      const DatasetManifest m = checked_manifest(manifest_path, config);
      TeeLog log;
      log << "fingerprint=" << fingerprint(config) << " config=" << fingerprint_json(config).dump() << '\n';
      const auto rows = run_ablation(m, config, &log);
      fs::create_directories(out_dir);
      const fs::path out(out_dir);
      write_text(out / "ablation.txt", render_ablation_table(rows));
      write_text(out / "ablation.csv", render_ablation_csv(rows));
      const fs::path log_file = out / "ablation.log";
      log.flush_to(&log_file);
      std::cout << render_ablation_table(rows);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
