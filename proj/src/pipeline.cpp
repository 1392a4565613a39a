#include "hypermaps/pipeline.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include "hypermaps/errors.hpp"
#include "hypermaps/parallel.hpp"
#include "hypermaps/rng.hpp"

namespace hypermaps {

using nlohmann::json;

namespace {

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string pad_right(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string pad_left(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

LabelMask load_truth(const DatasetManifest& manifest, const ManifestEntry& entry) {
  if (!entry.label_mask_path) throw DataError("entry '" + entry.image_id + "' has no label mask");
  LabelMask truth = read_label_mask(manifest.resolve(*entry.label_mask_path));
  if (truth.size != entry.image_size) {
    throw DataError("label mask of '" + entry.image_id + "' does not match the image size");
  }
  return truth;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<GridCell> grid_cells(ImageSize image, Pixel offset) {
  if (offset.x < 1 || offset.y < 1) throw ValidationError("grid offset must be positive");
  std::vector<GridCell> cells;
  for (int y0 = 0; y0 < image.height; y0 += offset.y) {
    const int y1 = std::min(y0 + offset.y, image.height);
    for (int x0 = 0; x0 < image.width; x0 += offset.x) {
      const int x1 = std::min(x0 + offset.x, image.width);
      cells.push_back({{x0, y0, x1, y1}, {x0 + (x1 - x0) / 2, y0 + (y1 - y0) / 2}});
    }
  }
  return cells;
}

TrainingSet build_training_set(const DatasetManifest& manifest, const std::string& fold, const PipelineConfig& config,
                               int patch_size) {
  const auto entries = manifest.fold(fold);
  if (entries.empty()) throw DataError("fold '" + fold + "' has no entries");
  TrainingSet set;
  for (const ManifestEntry* entry : entries) {
    const LabelMask truth = load_truth(manifest, *entry);
    const ImageSize image = entry->image_size;
    if (patch_size > image.width || patch_size > image.height) {
      throw ValidationError("patch size " + std::to_string(patch_size) + " exceeds image '" + entry->image_id + "'");
    }
    std::vector<PatchSample> variants;
    for (const auto& cell : grid_cells(image, config.offset)) {
      const std::uint8_t label = truth.at(cell.center.x, cell.center.y);
      if (label == kUnlabeled) continue;
      const int half = patch_size / 2;
      const Pixel center{std::clamp(cell.center.x, half, image.width - patch_size + half),
                         std::clamp(cell.center.y, half, image.height - patch_size + half)};
      PatchSample base{entry->image_id, entry->time_tag, PatchSpec{center, patch_size}, label, 0};
      ++set.class_counts[label];
      if (config.augmentation) {
        for (auto& v : augment(base, image)) variants.push_back(std::move(v));
      } else {
        variants.push_back(std::move(base));
      }
    }
    if (variants.empty()) continue;
    set.image_ids.push_back(entry->image_id);

    const FeatureStack stack = load_stack(manifest, *entry, config.descriptor.layout);
    std::optional<FeatureStack> mirrored;
    if (config.augmentation) mirrored = flip_horizontal(stack);
    std::vector<LabeledDescriptor> out(variants.size());
    parallel_for(variants.size(), config.threads, [&](std::size_t i) {
      const auto& v = variants[i];
      const FeatureStack& source = v.flipped() ? *mirrored : stack;
      out[i] = {extract_descriptor(source, variant_window(v, image), config.descriptor), v.label};
    });
    for (auto& s : out) set.samples.push_back(std::move(s));
    for (auto& v : variants) set.patches.push_back(std::move(v));
  }
  if (set.samples.empty()) throw DataError("fold '" + fold + "' has no labelled grid cells");
  return set;
}

ClassifierSet train_fold(const DatasetManifest& manifest, const std::string& fold, const PipelineConfig& config,
                         std::ostream* log, std::vector<std::string>* train_ids) {
  config.validate();
  std::vector<int> sizes;
  if (config.classifier_mode == ClassifierMode::shared) {
    sizes.push_back(config.base_size);
  } else {
    sizes = config.scales.sizes;
  }
  ClassifierSet set;
  for (int size : sizes) {
    const TrainingSet ts = build_training_set(manifest, fold, config, size);
    if (log) {
      *log << "train fold=" << fold << " patch_size=" << size << " images=" << ts.image_ids.size()
           << " patches=" << (ts.class_counts[0] + ts.class_counts[1] + ts.class_counts[2])
           << " samples=" << ts.samples.size();
      for (int c = 0; c < kNumLabels; ++c) *log << ' ' << kLabelNames[c] << '=' << ts.class_counts[c];
      *log << '\n';
      *log << "train_ids fold=" << fold << ' ' << join(ts.image_ids) << '\n';
    }
    if (train_ids && train_ids->empty()) *train_ids = ts.image_ids;
    const int scale = config.classifier_mode == ClassifierMode::shared ? 0 : size;
    set.models.push_back({scale, train(ts.samples, config.svm_hyperparams(), kNumLabels)});
  }
  return set;
}

LabelingResult label_change_regions(const FeatureStack& stack, const ChangeMask& change, const ClassifierSet& models,
                                    const ScaleSet& scales, Pixel offset, const DescriptorConfig& config,
                                    int threads) {
  if (change.size != stack.image_size) throw ValidationError("change mask does not match the image size");
  scales.validate();
  LabelingResult result;
  result.labels = LabelMask(stack.image_size, kUnlabeled);
  std::vector<GridCell> active;
  for (const auto& cell : grid_cells(stack.image_size, offset)) {
    bool any = false;
    for (int y = cell.area.y0; y < cell.area.y1 && !any; ++y)
      for (int x = cell.area.x0; x < cell.area.x1 && !any; ++x) any = change.at(x, y) != 0;
    if (any) active.push_back(cell);
  }
  result.evaluations = static_cast<int>(active.size());
  result.empty_change_mask = active.empty();
  std::vector<int> winners(active.size());
  parallel_for(active.size(), threads, [&](std::size_t i) {
    winners[i] = multiscale_label(stack, active[i].center, scales, models, config).winner;
  });
  for (std::size_t i = 0; i < active.size(); ++i) {
    const Rect& a = active[i].area;
    for (int y = a.y0; y < a.y1; ++y)
      for (int x = a.x0; x < a.x1; ++x)
        if (change.at(x, y)) result.labels.at(x, y) = static_cast<std::uint8_t>(winners[i]);
  }
  return result;
}

// ---------------------------------------------------------------------------

void EvalReport::merge(const EvalReport& other) {
  for (int t = 0; t < kNumLabels; ++t) {
    for (int p = 0; p < kNumLabels; ++p) confusion[t][p] += other.confusion[t][p];
    unassigned[t] += other.unassigned[t];
    class_pixels[t] += other.class_pixels[t];
  }
  total += other.total;
  finalize();
}

void EvalReport::finalize() {
  long long correct = 0;
  for (int c = 0; c < kNumLabels; ++c) {
    correct += confusion[c][c];
    per_class_accuracy[c] =
        class_pixels[c] > 0 ? 100.0 * static_cast<double>(confusion[c][c]) / static_cast<double>(class_pixels[c]) : 0.0;
  }
  overall_accuracy = total > 0 ? 100.0 * static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

EvalReport evaluate(const LabelMask& pred, const LabelMask& truth) {
  if (pred.size != truth.size) throw ValidationError("prediction and truth masks differ in size");
  EvalReport r;
  for (std::size_t i = 0; i < truth.data.size(); ++i) {
    const auto t = truth.data[i];
    if (t == kUnlabeled) continue;
    if (t >= kNumLabels) throw DataError("truth label " + std::to_string(t) + " is not a class");
    const auto p = pred.data[i];
    ++r.class_pixels[t];
    ++r.total;
    if (p < kNumLabels) {
      ++r.confusion[t][p];
    } else {
      ++r.unassigned[t];
    }
  }
  if (r.total == 0) throw ValidationError("truth mask has no labelled pixel");
  r.finalize();
  return r;
}

json report_to_json(const EvalReport& r) {
  json classes = json::array();
  for (int c = 0; c < kNumLabels; ++c) {
    classes.push_back({{"label", kLabelNames[c]},
                       {"pixels", r.class_pixels[c]},
                       {"accuracy", r.per_class_accuracy[c]},
                       {"unassigned", r.unassigned[c]}});
  }
  json confusion = json::array();
  for (const auto& row : r.confusion) confusion.push_back(row);
  return {{"fold", r.fold},
          {"overall_accuracy", r.overall_accuracy},
          {"total_pixels", r.total},
          {"classes", classes},
          {"confusion", confusion},
          {"fingerprint", r.fingerprint},
          {"config", r.config}};
}

std::string render_table(const std::vector<ReportRow>& rows) {
  std::size_t width = 8;
  for (const auto& r : rows) width = std::max(width, r.approach.size());
  std::ostringstream os;
  os << pad_right("Approach", width) << "  " << pad_left("t0 (%)", 7) << "  " << pad_left("t1 (%)", 7) << '\n';
  for (const auto& r : rows) {
    os << pad_right(r.approach, width) << "  " << pad_left(fmt2(r.t0), 7) << "  " << pad_left(fmt2(r.t1), 7) << '\n';
  }
  return os.str();
}

std::string render_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  os << "approach,t0,t1\n";
  for (const auto& r : rows) os << '"' << r.approach << "\"," << fmt2(r.t0) << ',' << fmt2(r.t1) << '\n';
  return os.str();
}

std::string approach_name(const PipelineConfig& config) {
  std::string name = config.scales.sizes.size() > 1 ? "Multi-scale " : "Single-scale ";
  if (config.descriptor.kind == DescriptorKind::hypercolumn) return name + "Hypercolumns";
  return name + (config.descriptor.weighted ? "Weighted Hypermaps" : "Hypermaps");
}

// ---------------------------------------------------------------------------

FoldRun test_fold(const DatasetManifest& manifest, const std::string& fold, const ClassifierSet& models,
                  const PipelineConfig& config, std::ostream* log) {
  const auto entries = manifest.fold(fold);
  if (entries.empty()) throw DataError("fold '" + fold + "' has no entries");
  FoldRun run;
  run.report.fold = fold;
  for (const ManifestEntry* entry : entries) {
    if (!entry->change_mask_path) throw DataError("entry '" + entry->image_id + "' has no change mask");
    const ChangeMask change = read_change_mask(manifest.resolve(*entry->change_mask_path));
    const LabelMask truth = load_truth(manifest, *entry);
    const FeatureStack stack = load_stack(manifest, *entry, config.descriptor.layout);
    auto labeled = label_change_regions(stack, change, models, config.scales, config.offset, config.descriptor,
                                        config.threads);
    if (log) {
      *log << "test fold=" << fold << " image=" << entry->image_id << " evaluations=" << labeled.evaluations;
      if (labeled.empty_change_mask) *log << " warning=empty_change_mask";
      *log << '\n';
    }
    bool any_truth = false;
    for (auto v : truth.data) any_truth = any_truth || v != kUnlabeled;
    if (any_truth) run.report.merge(evaluate(labeled.labels, truth));
    run.test_ids.push_back(entry->image_id);
    run.predictions.emplace(entry->image_id, std::move(labeled.labels));
  }
  if (run.report.total == 0) throw DataError("fold '" + fold + "' has no labelled pixels to evaluate");
  run.report.config = fingerprint_json(config);
  run.report.fingerprint = fingerprint(config);
  return run;
}

CrossTimeResult cross_time_run(const DatasetManifest& manifest, const PipelineConfig& config, std::ostream* log) {
  config.validate();
  for (const char* f : {kFoldT0, kFoldT1}) {
    if (manifest.fold(f).empty()) throw DataError(std::string("missing fold ") + f);
  }
  if (log) *log << "fingerprint=" << fingerprint(config) << " config=" << fingerprint_json(config).dump() << '\n';
  CrossTimeResult result;
  std::vector<std::string> ids;
  const ClassifierSet from_t1 = train_fold(manifest, kFoldT1, config, log, &ids);
  result.t0 = test_fold(manifest, kFoldT0, from_t1, config, log);
  result.t0.train_ids = ids;
  ids.clear();
  const ClassifierSet from_t0 = train_fold(manifest, kFoldT0, config, log, &ids);
  result.t1 = test_fold(manifest, kFoldT1, from_t0, config, log);
  result.t1.train_ids = ids;
  return result;
}

std::string render_run_report(const CrossTimeResult& run, const PipelineConfig& config) {
  std::ostringstream os;
  os << "# fingerprint " << fingerprint(config) << '\n';
  os << "# config " << fingerprint_json(config).dump() << "\n\n";
  os << render_table({{approach_name(config), run.t0.report.overall_accuracy, run.t1.report.overall_accuracy}});
  for (const FoldRun* f : {&run.t0, &run.t1}) {
    const EvalReport& r = f->report;
    os << "\nFold " << r.fold << " (trained on " << (r.fold == kFoldT0 ? kFoldT1 : kFoldT0) << ")\n";
    os << pad_right("class", 10) << pad_left("pixels", 9) << pad_left("acc (%)", 9) << pad_left("car", 9)
       << pad_left("building", 9) << pad_left("rubble", 9) << pad_left("none", 9) << '\n';
    for (int c = 0; c < kNumLabels; ++c) {
      os << pad_right(kLabelNames[c], 10) << pad_left(std::to_string(r.class_pixels[c]), 9)
         << pad_left(fmt2(r.per_class_accuracy[c]), 9);
      for (int p = 0; p < kNumLabels; ++p) os << pad_left(std::to_string(r.confusion[c][p]), 9);
      os << pad_left(std::to_string(r.unassigned[c]), 9) << '\n';
    }
    os << pad_right("overall", 10) << pad_left(std::to_string(r.total), 9) << pad_left(fmt2(r.overall_accuracy), 9)
       << '\n';
  }
  return os.str();
}

json run_to_json(const CrossTimeResult& run, const PipelineConfig& config) {
  return {{"fingerprint", fingerprint(config)},
          {"approach", approach_name(config)},
          {"config", fingerprint_json(config)},
          {"folds", {{"t0", report_to_json(run.t0.report)}, {"t1", report_to_json(run.t1.report)}}},
          {"train_ids", {{"t0", run.t0.train_ids}, {"t1", run.t1.train_ids}}},
          {"test_ids", {{"t0", run.t0.test_ids}, {"t1", run.t1.test_ids}}}};
}

// ---------------------------------------------------------------------------

RgbImage render_overlay(const LabelMask& labels, const RgbImage* base) {
  static constexpr std::array<std::array<std::uint8_t, 3>, kNumLabels> kColors = {{{0, 0, 255}, {0, 255, 0}, {255, 0, 0}}};
  if (base && base->size != labels.size) throw ValidationError("base image and label mask differ in size");
  RgbImage out;
  out.size = labels.size;
  out.rgb = base ? base->rgb : std::vector<std::uint8_t>(static_cast<std::size_t>(labels.size.area()) * 3, 0);
  for (std::size_t i = 0; i < labels.data.size(); ++i) {
    const auto l = labels.data[i];
    if (l >= kNumLabels) continue;
    for (std::size_t ch = 0; ch < 3; ++ch) {
      const auto color = kColors[l][ch];
      auto& px = out.rgb[3 * i + ch];
      px = base ? static_cast<std::uint8_t>((px + color + 1) / 2) : color;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<AblationRow> run_ablation(const DatasetManifest& manifest, const PipelineConfig& base, std::ostream* log) {
  struct Variant {
    std::string knob;
    std::string setting;
    PipelineConfig config;
  };
  std::vector<Variant> variants;
  auto add = [&](std::string knob, std::string setting, PipelineConfig c) {
    variants.push_back({std::move(knob), std::move(setting), std::move(c)});
  };
  for (bool on : {true, false}) {
    PipelineConfig c = base;
    c.descriptor.weighted = on;
    add("weighted", on ? "on" : "off", c);
  }
  for (bool on : {true, false}) {
    PipelineConfig c = base;
    c.augmentation = on;
    add("augmentation", on ? "on" : "off", c);
  }
  for (const auto& s : base.ablation.scale_sets) {
    PipelineConfig c = base;
    c.scales = s;
    std::string name;
    for (int v : s.sizes) name += (name.empty() ? "" : "+") + std::to_string(v);
    add("scales", name, c);
  }
  for (double s2 : base.ablation.sigma2_values) {
    PipelineConfig c = base;
    c.descriptor.weighted = true;
    c.descriptor.sigma2 = s2;
    c.scales = ScaleSet{{base.ablation.sigma2_scale}};
    add("sigma2", fmt2(s2), c);
  }

  // Shared classifiers do not depend on the test scales.
  auto training_key = [](const PipelineConfig& c, const char* fold) {
    json j = fingerprint_json(c);
    if (c.classifier_mode == ClassifierMode::shared) j.erase("scales");
    return j.dump() + fold;
  };
  std::map<std::string, ClassifierSet> cache;
  auto models_for = [&](const PipelineConfig& c, const char* fold) -> const ClassifierSet& {
    const auto key = training_key(c, fold);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, train_fold(manifest, fold, c, log)).first;
    return it->second;
  };

  std::vector<AblationRow> rows;
  for (const auto& v : variants) {
    v.config.validate();
    if (log) *log << "ablation knob=" << v.knob << " setting=" << v.setting << " fingerprint=" << fingerprint(v.config) << '\n';
    const auto t0 = test_fold(manifest, kFoldT0, models_for(v.config, kFoldT1), v.config, log);
    const auto t1 = test_fold(manifest, kFoldT1, models_for(v.config, kFoldT0), v.config, log);
    rows.push_back({v.knob, v.setting, t0.report.overall_accuracy, t1.report.overall_accuracy});
  }
  return rows;
}

std::string render_ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << pad_right("knob", 14) << pad_right("setting", 18) << pad_left("t0 (%)", 8) << pad_left("t1 (%)", 9) << '\n';
  for (const auto& r : rows) {
    os << pad_right(r.knob, 14) << pad_right(r.setting, 18) << pad_left(fmt2(r.t0), 8) << pad_left(fmt2(r.t1), 9)
       << '\n';
  }
  return os.str();
}

std::string render_ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << "knob,setting,t0,t1\n";
  for (const auto& r : rows) os << r.knob << ',' << r.setting << ',' << fmt2(r.t0) << ',' << fmt2(r.t1) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------

DatasetManifest write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticSpec& spec,
                                        int scenes_per_fold, std::uint64_t seed) {
  if (scenes_per_fold < 1) throw ValidationError("need at least one scene per fold");
  namespace fs = std::filesystem;
  fs::create_directories(dir / "tensors");
  fs::create_directories(dir / "masks");
  DatasetManifest manifest;
  manifest.base_dir = dir;
  int fold_index = 0;
  for (const char* fold : {kFoldT0, kFoldT1}) {
    for (int i = 0; i < scenes_per_fold; ++i) {
      char id[64];
      std::snprintf(id, sizeof(id), "scene_%s_%03d", fold, i);
      const auto scene = synthesize_scene(mix_seed(seed, static_cast<std::uint64_t>(fold_index * 100000 + i)), spec);
      ManifestEntry e;
      e.image_id = id;
      e.time_tag = fold;
      e.image_size = spec.image_size;
      for (const auto& [layer, file] : save_stack_layers(scene.stack, spec.layout, dir / "tensors", id)) {
        e.layer_files[layer] = fs::path("tensors") / file;
      }
      e.change_mask_path = fs::path("masks") / (std::string(id) + "_change.png");
      e.label_mask_path = fs::path("masks") / (std::string(id) + "_labels.png");
      write_change_mask(dir / *e.change_mask_path, scene.change);
      write_label_mask(dir / *e.label_mask_path, scene.labels);
      manifest.entries.push_back(std::move(e));
    }
    ++fold_index;
  }
  save_manifest(dir / "manifest.json", manifest);
  return manifest;
}

}  // namespace hypermaps
