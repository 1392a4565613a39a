// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the number of failures.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <regex>
#include <sstream>

#include "hypermaps/augmentation.hpp"
#include "hypermaps/descriptor.hpp"
#include "hypermaps/multiscale.hpp"
#include "hypermaps/pipeline.hpp"
#include "hypermaps/upsample.hpp"
#include "hypermaps/weights.hpp"
#include "seeded_tensor.hpp"
#include "support.hpp"

using namespace hypermaps;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Non-negative maps, like rectified activations.
FeatureStack relu_stack(std::uint64_t seed, ImageSize image, const DescriptorLayout& layout) {
  FeatureStack s = testing::random_stack(seed, image, layout);
  for (auto& [name, m] : s.layers)
    for (int c = 0; c < m.channels(); ++c)
      for (auto& v : m.channel(c)) v = std::abs(v);
  return s;
}

// ---------------------------------------------------------------------------

Outcome descriptor_dimension() {
  const auto start = Clock::now();
  const auto layout = DescriptorLayout::vgg16();
  const FeatureStack s = testing::random_stack(1, {120, 160}, layout);
  const PatchSpec p{{80, 60}, 70};
  const Descriptor d = hypermap_descriptor(s, p, GaussianParams::centered_on(p, 300.0), true, true);
  const Descriptor h = hypercolumn_descriptor(s, {80, 60});
  const auto b = layout.boundaries();
  const double t = seconds_since(start);
  const bool ok = d.size() == 4736 && h.size() == 4736 && b == std::vector<int>{0, 128, 640, 4736} &&
                  d.segment("conv4_3").data() == d.values.data() + 128 &&
                  d.segment("fc7").data() == d.values.data() + 640 && t < 1.0;
  return {ok, "dim=" + std::to_string(d.size()) + " boundaries=" + std::to_string(b[1]) + "," + std::to_string(b[2]) +
                  " time=" + fmt(t) + "s"};
}

Outcome accumulation_oracle() {
  const auto start = Clock::now();
  Rng rng(31337);
  double worst = 0.0;
  const DescriptorLayout one{{{"pool2", 2, LayerKind::map}}};
  for (int n = 0; n < 1000; ++n) {
    const ImageSize image{static_cast<int>(24 + rng.below(100)), static_cast<int>(24 + rng.below(100))};
    const int stride = rng.below(2) ? 4 : 8;
    FeatureStack s;
    s.image_size = image;
    s.layers.emplace("pool2", testing::random_map(rng, 2, (image.height + stride - 1) / stride,
                                                  (image.width + stride - 1) / stride));
    const FeatureMap& m = s.layer("pool2");
    const PatchSpec p{{static_cast<int>(rng.below(static_cast<std::uint64_t>(image.width))),
                       static_cast<int>(rng.below(static_cast<std::uint64_t>(image.height)))},
                      static_cast<int>(1 + rng.below(90))};
    const double sigma2 = rng.uniform(10.0, 1000.0);
    const bool weighted = rng.below(2) == 0;
    const bool normalized = rng.below(4) != 0;
    const auto params = GaussianParams::centered_on(p, sigma2);
    const Descriptor fast = hypermap_descriptor(s, p, params, weighted, normalized, one);

    // Reference: every pixel of the clamped patch, its weight from the formula, its value by interpolation.
    const Rect r = p.clamped(image);
    std::vector<double> acc(2, 0.0);
    double total = 0.0;
    for (int y = r.y0; y < r.y1; ++y) {
      for (int x = r.x0; x < r.x1; ++x) {
        const double d2 = (x - p.mu_x()) * (x - p.mu_x()) + (y - p.mu_y()) * (y - p.mu_y());
        const double a = weighted ? std::exp(-d2 / (2.0 * sigma2)) : 1.0;
        total += a;
        for (int c = 0; c < 2; ++c) acc[static_cast<std::size_t>(c)] += a * sample_upsampled(m, c, image, x, y);
      }
    }
    for (int c = 0; c < 2; ++c) {
      const double want = normalized ? acc[static_cast<std::size_t>(c)] / total : acc[static_cast<std::size_t>(c)];
      worst = std::max(worst, testing::relative_error(fast.values[static_cast<std::size_t>(c)], want));
    }

    // Full-resolution grids through the direct and integral-image accumulators.
    if (n % 4 == 0) {
      const FeatureMap up = upsample_bilinear(m, image);
      const ChannelIntegrals integrals(up);
      const WeightGrid g = weighted ? gaussian_weights(p, params, image, normalized) : uniform_weights(p, image, normalized);
      for (int c = 0; c < 2; ++c) {
        double want = 0.0;
        for (int y = r.y0; y < r.y1; ++y)
          for (int x = r.x0; x < r.x1; ++x) {
            const double d2 = (x - p.mu_x()) * (x - p.mu_x()) + (y - p.mu_y()) * (y - p.mu_y());
            want += (weighted ? std::exp(-d2 / (2.0 * sigma2)) : 1.0) * up.at(c, y, x);
          }
        if (normalized) want /= total;
        worst = std::max(worst, testing::relative_error(accumulate_channel(up, c, g), want));
        worst = std::max(worst, testing::relative_error(accumulate_channel(integrals, c, g), want));
      }
    }
  }
  const double t = seconds_since(start);
  return {worst <= 1e-5 && t < 30.0, "cases=1000 max_rel_err=" + fmt(worst) + " time=" + fmt(t) + "s"};
}

Outcome gaussian_limit() {
  const auto start = Clock::now();
  const auto layout = DescriptorLayout::vgg16();
  const ImageSize image{120, 160};
  const FeatureStack s = relu_stack(2024, image, layout);
  Rng rng(55);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const PatchSpec p{{static_cast<int>(rng.below(160)), static_cast<int>(rng.below(120))},
                      static_cast<int>(1 + rng.below(90))};
    const auto params = GaussianParams::centered_on(p, 1e9);
    const Descriptor w = hypermap_descriptor(s, p, params, true, true, layout);
    const Descriptor u = hypermap_descriptor(s, p, params, false, true, layout);
    for (std::size_t i = 0; i < w.size(); ++i) worst = std::max(worst, testing::relative_error(w.values[i], u.values[i]));
  }
  const double t = seconds_since(start);
  return {worst <= 1e-6 && t < 10.0, "patches=100 max_rel_err=" + fmt(worst) + " time=" + fmt(t) + "s"};
}

Outcome weight_normalization() {
  const ImageSize image{120, 160};
  double worst = 0.0;
  int grids = 0;
  const DescriptorLayout one{{{"pool2", 1, LayerKind::map}}};
  FeatureStack ones;
  ones.image_size = image;
  ones.layers.emplace("pool2", FeatureMap(1, 30, 40, std::vector<float>(1200, 1.0f)));
  for (int size : {10, 30, 50, 70, 90}) {
    for (int cy = 0; cy < 120; cy += 17) {
      for (int cx = 0; cx < 160; cx += 23) {
        const PatchSpec p{{cx, cy}, size};
        const auto params = GaussianParams::centered_on(p, 300.0);
        worst = std::max(worst, std::abs(gaussian_weights(p, params, image, true).sum() - 1.0));
        worst = std::max(worst, std::abs(uniform_weights(p, image, true).sum() - 1.0));
        // The descriptor path applies the same normalization: a constant map reads back its constant.
        const double v = hypermap_descriptor(ones, p, params, true, true, one).values[0];
        worst = std::max(worst, std::abs(v - 1.0) > 1e-6 ? 1.0 : 0.0);
        ++grids;
      }
    }
  }
  return {worst <= 1e-9, "grids=" + std::to_string(grids) + " max_abs_dev=" + fmt(worst)};
}

Outcome upsampling_exactness() {
  Rng rng(4);
  FeatureMap m(3, 6, 9);
  for (int c = 0; c < 3; ++c)
    for (auto& v : m.channel(c)) v = static_cast<float>(rng.uniform(-5, 5));
  const bool identity = upsample_bilinear(m, {6, 9}) == m;
  const FeatureMap up = upsample_bilinear(m, {41, 67});
  bool corners = true;
  for (int c = 0; c < 3; ++c) {
    corners = corners && up.at(c, 0, 0) == m.at(c, 0, 0) && up.at(c, 0, 66) == m.at(c, 0, 8) &&
              up.at(c, 40, 0) == m.at(c, 5, 0) && up.at(c, 40, 66) == m.at(c, 5, 8);
  }
  const FeatureMap small(1, 2, 2, {1.0f, 2.0f, 3.0f, 4.0f});
  const FeatureMap three = upsample_bilinear(small, {3, 3});
  const std::vector<float> hand{1.0f, 1.5f, 2.0f, 2.0f, 2.5f, 3.0f, 3.0f, 3.5f, 4.0f};
  const bool hand_ok = std::equal(hand.begin(), hand.end(), three.values().begin());
  return {identity && corners && hand_ok, std::string("identity=") + (identity ? "ok" : "bad") +
                                              " corners=" + (corners ? "ok" : "bad") + " 2x2->3x3=" + (hand_ok ? "ok" : "bad")};
}

Outcome voting_semantics() {
  Rng rng(77);
  int majority_cases = 0;
  int tie_cases = 0;
  bool ok = true;
  for (int code = 0; code < 27; ++code) {
    const int labels[3] = {code % 3, code / 3 % 3, code / 9};
    std::vector<ScaleVote> votes;
    for (int s = 0; s < 3; ++s) {
      ScaleVote v{30 + 20 * s, labels[s], {rng.uniform(-2, 0), rng.uniform(-2, 0), rng.uniform(-2, 0)}};
      v.scores[static_cast<std::size_t>(labels[s])] = rng.uniform(0.1, 2.0);
      votes.push_back(v);
    }
    const VoteRecord r = tally_votes(votes, 3);
    ok = ok && std::accumulate(r.counts.begin(), r.counts.end(), 0) == 3;
    const auto top = std::max_element(r.counts.begin(), r.counts.end());
    if (*top >= 2) {
      ++majority_cases;
      ok = ok && r.winner == static_cast<int>(top - r.counts.begin());
    } else {
      ++tie_cases;
      int best = 0;
      for (int c = 1; c < 3; ++c)
        if (r.score_sums[static_cast<std::size_t>(c)] > r.score_sums[static_cast<std::size_t>(best)]) best = c;
      ok = ok && r.winner == best;
    }
    std::vector<int> order{0, 1, 2};
    do {
      std::vector<ScaleVote> permuted;
      for (int i : order) permuted.push_back(votes[static_cast<std::size_t>(i)]);
      const VoteRecord q = tally_votes(permuted, 3);
      ok = ok && q.winner == r.winner && q.counts == r.counts && q.score_sums == r.score_sums;
    } while (std::next_permutation(order.begin(), order.end()));
  }
  // Equal counts and equal score sums fall to the lowest label.
  const VoteRecord flat = tally_votes({{30, 2, {0, 0, 1}}, {50, 1, {0, 1, 0}}, {70, 0, {1, 0, 0}}}, 3);
  ok = ok && flat.winner == 0;
  return {ok && majority_cases == 21 && tie_cases == 6,
          "assignments=27 majority=" + std::to_string(majority_cases) + " three-way=" + std::to_string(tie_cases) +
              " permutations=6 each"};
}

Outcome augmentation_arithmetic() {
  const ImageSize image{120, 160};
  Rng rng(8);
  bool ok = true;
  int samples = 0;
  const auto layout = testing::small_layout();
  const FeatureStack stack = testing::random_stack(3, image, layout);
  const FeatureStack mirrored = flip_horizontal(stack);
  ok = ok && flip_horizontal(mirrored).layers == stack.layers;
  DescriptorConfig cfg;
  cfg.layout = layout;
  for (int n = 0; n < 500; ++n) {
    const int size = static_cast<int>(2 + rng.below(89));
    const Pixel c{static_cast<int>(size / 2 + rng.below(static_cast<std::uint64_t>(160 - size + 1))),
                  static_cast<int>(size / 2 + rng.below(static_cast<std::uint64_t>(120 - size + 1)))};
    const PatchSample s{"img", "t0", {c, size}, static_cast<int>(n % 3), 0};
    const auto v = augment(s, image);
    ok = ok && v.size() == 18 && v[0] == s && variant_window(v[0], image) == SampleWindow::of(s.patch);
    for (const auto& x : v) {
      ok = ok && flip(flip(x)) == x && variant_window(x, image).mirrored(image).mirrored(image) == variant_window(x, image);
    }
    if (n < 20) {
      const Descriptor orig = hypermap_descriptor(stack, SampleWindow::of(s.patch), cfg);
      ok = ok && hypermap_descriptor(stack, variant_window(v[0], image), cfg).values == orig.values;
    }
    ++samples;
  }
  return {ok, "samples=" + std::to_string(samples) + " variants_each=18 identity=ok involution=ok"};
}

Outcome classifier() {
  // Three separable blobs.
  Rng rng(9);
  const int dim = 40;
  std::vector<std::vector<double>> centres(3, std::vector<double>(dim));
  for (auto& c : centres)
    for (auto& v : c) v = rng.normal() * 3.0;
  std::vector<LabeledDescriptor> data;
  for (int i = 0; i < 100; ++i) {
    for (int k = 0; k < 3; ++k) {
      LabeledDescriptor d;
      d.label = k;
      for (int j = 0; j < dim; ++j)
        d.descriptor.values.push_back(static_cast<float>(centres[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] + 0.5 * rng.normal()));
      data.push_back(std::move(d));
    }
  }
  const SvmHyperparams hp{1.0, 50, 123};
  const SvmModel a = train(data, hp);
  const SvmModel b = train(data, hp);
  int correct = 0;
  for (const auto& s : data) correct += predict(a, s.descriptor).label == s.label;
  const bool identical = a.weights == b.weights && a.biases == b.biases && a.epoch_objective == b.epoch_objective;
  bool monotone = true;
  double worst_rise = 0.0;
  for (const auto& trace : a.checkpoint_objective) {
    for (std::size_t e = 1; e < trace.size(); ++e) {
      worst_rise = std::max(worst_rise, (trace[e] - trace[e - 1]) / std::abs(trace[e - 1]));
      monotone = monotone && trace[e] <= trace[e - 1] * (1.0 + 1e-3);
    }
  }
  bool invariant = true;
  for (float k : {1e-3f, 0.25f, 8.0f, 1e3f}) {
    SvmModel s = a;
    for (auto& w : s.weights) w *= k;
    for (auto& x : s.biases) x *= k;
    for (const auto& d : data) invariant = invariant && predict(s, d.descriptor).label == predict(a, d.descriptor).label;
  }
  const double acc = 100.0 * correct / static_cast<double>(data.size());
  return {acc == 100.0 && identical && monotone && invariant,
          "train_acc=" + fmt(acc, 5) + "% bit_identical=" + (identical ? "yes" : "no") +
              " max_checkpoint_rise=" + fmt(worst_rise) + " argmax_invariant=" + (invariant ? "yes" : "no")};
}

Outcome end_to_end(const fs::path& cli, const fs::path& work) {
  const auto start = Clock::now();
  const fs::path data = work / "e2e_data";
  const fs::path r1 = work / "e2e_run1";
  const fs::path r2 = work / "e2e_run2";
  const std::string q = " >/dev/null 2>&1";
  if (shell(cli.string() + " synth --out " + data.string() + " --scenes 10 --data-seed 1" + q) != 0)
    return {false, "synth failed"};
  if (shell(cli.string() + " validate --manifest " + (data / "manifest.json").string() + q) != 0)
    return {false, "synthetic manifest failed validation"};
  for (const auto& out : {r1, r2}) {
    if (shell(cli.string() + " run --manifest " + (data / "manifest.json").string() + " --out " + out.string() + q) != 0)
      return {false, "run failed"};
  }
  const double t = seconds_since(start);
  bool identical = true;
  for (const char* f : {"report.txt", "report.csv", "report.json", "run.log"})
    identical = identical && slurp(r1 / f) == slurp(r2 / f) && !slurp(r1 / f).empty();

  const auto report = nlohmann::json::parse(slurp(r1 / "report.json"));
  const double t0 = report.at("folds").at("t0").at("overall_accuracy").get<double>();
  const double t1 = report.at("folds").at("t1").at("overall_accuracy").get<double>();

  int min_patches = 1 << 30;
  const std::string log = slurp(r1 / "run.log");
  const std::regex patches_re(R"(patches=(\d+))");
  for (auto it = std::sregex_iterator(log.begin(), log.end(), patches_re); it != std::sregex_iterator(); ++it) {
    min_patches = std::min(min_patches, std::stoi((*it)[1]));
  }
  const bool fingerprint_first = log.rfind("fingerprint=", 0) == 0;
  const bool ok = t0 >= 95.0 && t1 >= 95.0 && t < 300.0 && identical && min_patches >= 300 && fingerprint_first;
  return {ok, "t0=" + fmt(t0, 4) + "% t1=" + fmt(t1, 4) + "% patches/fold>=" + std::to_string(min_patches) +
                  " byte_identical=" + (identical ? "yes" : "no") + " time=" + fmt(t) + "s"};
}

Outcome ablation_direction(const fs::path& work) {
  const auto start = Clock::now();
  SyntheticSpec spec;
  spec.noise = 5.0;
  const DatasetManifest m = write_synthetic_dataset(work / "ablation_data", spec, 10, 1);
  PipelineConfig c;
  c.ablation.sigma2_values = {};
  c.ablation.scale_sets = {ScaleSet{{30}}, ScaleSet{{50}}, ScaleSet{{70}}, ScaleSet{{30, 50, 70}}};
  const auto rows = run_ablation(m, c);
  auto mean_of = [&](const std::string& knob, const std::string& setting) {
    for (const auto& r : rows)
      if (r.knob == knob && r.setting == setting) return (r.t0 + r.t1) / 2.0;
    throw std::runtime_error("missing ablation row " + knob + "=" + setting);
  };
  const double weighted = mean_of("weighted", "on");
  const double unweighted = mean_of("weighted", "off");
  double best_single = 0.0;
  std::string best_name;
  for (const char* s : {"30", "50", "70"}) {
    if (mean_of("scales", s) > best_single) {
      best_single = mean_of("scales", s);
      best_name = s;
    }
  }
  const double multi = mean_of("scales", "30+50+70");
  const double t = seconds_since(start);
  const bool weighting_ok = weighted - unweighted > 0.0;
  const bool multi_ok = multi - best_single > 0.0;
  return {weighting_ok && multi_ok,
          "weighted=" + fmt(weighted, 4) + "% unweighted=" + fmt(unweighted, 4) + "% margin=" +
              fmt(weighted - unweighted) + (weighting_ok ? " [ok]" : " [short]") + "; multi=" + fmt(multi, 4) +
              "% best_single(" + best_name + ")=" + fmt(best_single, 4) + "% margin=" + fmt(multi - best_single) +
              (multi_ok ? " [ok]" : " [short]") + " time=" + fmt(t) + "s"};
}

Outcome tensor_format(const fs::path& helper, const fs::path& work, const fs::path& data_dir) {
  const fs::path mine = work / "tensors_here";
  const fs::path copies = work / "tensors_copied";
  const fs::path theirs = work / "tensors_there";
  for (const auto& d : {mine, copies, theirs}) fs::create_directories(d);
  const int n = 300;
  for (int i = 0; i < n; ++i) {
    const Tensor t = testing::seeded_tensor(11, i);
    write_tensor(mine / ("gen_" + std::to_string(i) + ".hmtf"), t.dims, t.values);
  }
  // Another process decodes what this one wrote and re-encodes it.
  bool copied = true;
  for (int i = 0; i < n && copied; ++i) {
    const auto name = "gen_" + std::to_string(i) + ".hmtf";
    copied = shell(helper.string() + " copy " + (mine / name).string() + " " + (copies / name).string()) == 0 &&
             read_file_bytes(mine / name) == read_file_bytes(copies / name);
  }
  // It also checks this process's files against its own encoder, and writes files this one checks.
  const bool expected = shell(helper.string() + " expect 11 " + std::to_string(n) + " " + mine.string()) == 0;
  bool generated = shell(helper.string() + " gen 12 " + std::to_string(n) + " " + theirs.string()) == 0;
  for (int i = 0; i < n && generated; ++i) {
    const Tensor want = testing::seeded_tensor(12, i);
    const Tensor got = read_tensor(theirs / ("gen_" + std::to_string(i) + ".hmtf"));
    generated = got.dims == want.dims &&
                std::memcmp(got.values.data(), want.values.data(), want.values.size() * sizeof(float)) == 0;
  }
  // Golden file written by an independent encoder.
  const std::uint32_t dims[] = {2, 2, 2};
  const float values[] = {0.0f, 1.0f, -1.0f, 0.5f, 3.25f, -2.5f, 1e-3f, 65504.0f};
  const bool golden = encode_tensor(dims, values) == read_file_bytes(data_dir / "golden_2x2x2.hmtf");
  return {copied && expected && generated && golden,
          "tensors=" + std::to_string(n) + " copy=" + (copied ? "ok" : "bad") + " peer_check=" + (expected ? "ok" : "bad") +
              " peer_write=" + (generated ? "ok" : "bad") + " golden=" + (golden ? "ok" : "bad")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance CLI TENSOR_HELPER [WORK_DIR]\n";
    return 2;
  }
  const fs::path cli = fs::absolute(argv[1]);
  const fs::path helper = fs::absolute(argv[2]);
  const fs::path work = argc > 3 ? fs::path(argv[3]) : fs::temp_directory_path() / "hypermaps_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"descriptor dimension", descriptor_dimension},
      {"accumulation oracle", accumulation_oracle},
      {"gaussian limit", gaussian_limit},
      {"weight normalization", weight_normalization},
      {"upsampling exactness", upsampling_exactness},
      {"voting semantics", voting_semantics},
      {"augmentation arithmetic", augmentation_arithmetic},
      {"classifier", classifier},
      {"end-to-end synthetic run", [&] { return end_to_end(cli, work); }},
      {"ablation direction", [&] { return ablation_direction(work); }},
      {"tensor format", [&] { return tensor_format(helper, work, testing::data_dir()); }},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  (" << o.detail << ")" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  fs::remove_all(work);
  return failures;
}
