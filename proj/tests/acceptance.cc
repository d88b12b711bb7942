// Copyright 2026 The herdsynth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "herdsynth/augment.h"
#include "herdsynth/cli.h"
#include "herdsynth/datasets.h"
#include "herdsynth/keypoints.h"
#include "herdsynth/metrics.h"
#include "herdsynth/mock_render.h"
#include "herdsynth/scene_layout.h"
#include "oracles.h"
#include "test_util.h"

namespace herdsynth {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c);
  return buf;
}

Outcome CheckAggregation() {
  const std::vector<double> values{0.150, 0.076, 0.331, 0.911};
  const std::vector<std::int64_t> counts{1200, 200, 185, 104000};
  std::vector<DatasetScores> scores;
  for (std::size_t i = 0; i < values.size(); ++i) {
    scores.push_back({"d" + std::to_string(i), counts[i], {{"mAP50", values[i]}}});
  }
  const EvalReport r = Aggregate(scores);
  const double avg = *r.average.at("mAP50");
  const double wavg = *r.weighted_average.at("mAP50");
  return {std::abs(avg - 0.367) <= 0.001 && std::abs(wavg - 0.899) <= 0.001,
          Format("average %.4f (want 0.367), weighted %.4f (want 0.899)", avg, wavg)};
}

// `targets` frames get one 12x12 animal above the area threshold; every frame
// also holds a 6x6 animal below it.
DatasetManifest BookkeepingManifest(const std::string& name, int frames, int targets,
                                    std::int64_t first_id) {
  DatasetManifest m;
  m.name = name;
  std::int64_t ann = first_id;
  for (int i = 0; i < frames; ++i) {
    const std::int64_t id = first_id + i;
    m.images.push_back({id, "f" + std::to_string(id) + ".png", 64, 64, id / 50, std::nullopt,
                        "m" + std::to_string(id) + ".png", std::nullopt});
    AnnotationRecord small;
    small.id = ann++;
    small.image_id = id;
    small.instance_id = 2;
    small.bbox = {40, 40, 6, 6};
    small.area = 36;
    small.keypoints.assign(27, Keypoint{});
    m.annotations.push_back(small);
    if (i < targets) {
      AnnotationRecord big = small;
      big.id = ann++;
      big.instance_id = 1;
      big.bbox = {8, 8, 12, 12};
      big.area = 144;
      big.keypoints[kNose] = {14, 14, 2};
      m.annotations.push_back(big);
    }
  }
  return m;
}

FrameInput BookkeepingFrame(const ImageEntry&) {
  FrameInput f;
  f.mask = InstanceMask(64, 64);
  for (int y = 40; y < 46; ++y) {
    for (int x = 40; x < 46; ++x) f.mask.set(x, y, 2);
  }
  for (int y = 8; y < 20; ++y) {
    for (int x = 8; x < 20; ++x) f.mask.set(x, y, 1);
  }
  return f;
}

Outcome CheckBookkeeping() {
  AugmentConfig cfg;
  cfg.area_threshold = 100;
  cfg.max_offset = 8;
  cfg.output_width = 64;
  cfg.output_height = 64;
  cfg.seed = 1;
  const DatasetManifest train =
      AugmentDataset(BookkeepingManifest("train", 14401, 8783, 1), BookkeepingFrame, nullptr, cfg);
  const DatasetManifest val = AugmentDataset(BookkeepingManifest("val", 3599, 2199, 1000000),
                                             BookkeepingFrame, nullptr, cfg);
  train.Validate();
  val.Validate();
  return {train.images.size() == 23184 && val.images.size() == 5798,
          Format("train %.0f frames (want 23184), val %.0f frames (want 5798)",
                 static_cast<double>(train.images.size()), static_cast<double>(val.images.size()))};
}

// Exact pointwise check: CDF of `candidate` <= CDF of `reference` at every
// sample value of either set.
bool CdfBelowEverywhere(const std::vector<double>& candidate, const std::vector<double>& reference) {
  auto cdf = [](const std::vector<double>& s, double x) {
    return static_cast<double>(std::upper_bound(s.begin(), s.end(), x) - s.begin()) /
           static_cast<double>(s.size());
  };
  for (const std::vector<double>* set : {&candidate, &reference}) {
    for (double x : *set) {
      if (cdf(candidate, x) > cdf(reference, x)) return false;
    }
  }
  return true;
}

// Desk-scale stand-in for the full-HD pipeline: every pixel constant is scaled
// by kScale so that the same thresholds apply to proportionally smaller frames.
constexpr int kCdfScenes = 200;
constexpr int kCdfWidth = 320;
constexpr int kCdfHeight = 180;
constexpr double kScale = kCdfWidth / 1920.0;

Outcome CheckCdfDominance() {
  const auto start = std::chrono::steady_clock::now();
  DatasetManifest source;
  source.name = "source";
  std::vector<InstanceMask> masks;
  for (int s = 0; s < kCdfScenes; ++s) {
    SceneConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    cfg.num_instances = 40;
    cfg.num_cameras = 1;
    cfg.pose_library_size = 16;
    cfg.bounds = Aabb{Vec3(-25.0, -25.0, 0.0), Vec3(25.0, 25.0, 0.0)};
    cfg.rig.width = kCdfWidth;
    cfg.rig.height = kCdfHeight;
    const SceneSpec scene = GenerateScene(cfg);
    const std::int64_t image_id = s + 1;
    const RenderedFrame frame = Rasterize(scene, scene.cameras[0], image_id);
    std::vector<AnnotationRecord> recs = AnnotateFrame(scene, scene.cameras[0], frame, 30.0 * kScale);
    source.images.push_back({image_id, "f.png", kCdfWidth, kCdfHeight, s, std::nullopt,
                             std::nullopt, std::nullopt});
    for (AnnotationRecord& r : recs) {
      r.id = static_cast<std::int64_t>(source.annotations.size()) + 1;
      source.annotations.push_back(std::move(r));
    }
    masks.push_back(frame.mask);
  }
  AugmentConfig cfg;
  cfg.area_threshold = 5000.0 * kScale * kScale;
  cfg.max_offset = static_cast<int>(std::lround(150.0 * kScale));
  cfg.output_width = kCdfWidth;
  cfg.output_height = kCdfHeight;
  cfg.seed = 1;
  const DatasetManifest augmented = AugmentDataset(
      source,
      [&](const ImageEntry& img) { return FrameInput{masks[static_cast<std::size_t>(img.id - 1)], {}}; },
      nullptr, cfg);
  DatasetManifest crops = augmented;
  crops.images.erase(crops.images.begin(), crops.images.begin() + kCdfScenes);
  crops.annotations.erase(crops.annotations.begin(),
                          crops.annotations.begin() + static_cast<long>(source.annotations.size()));
  const RatioSamples src = BboxRatioCdf(source);
  const RatioSamples gen = BboxRatioCdf(crops);
  const DominanceCheck w = QuantileDominance(gen.width_ratios, src.width_ratios);
  const DominanceCheck h = QuantileDominance(gen.height_ratios, src.height_ratios);
  const bool exact = CdfBelowEverywhere(gen.width_ratios, src.width_ratios) &&
                     CdfBelowEverywhere(gen.height_ratios, src.height_ratios);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream d;
  d << source.annotations.size() << " source boxes, " << crops.annotations.size()
    << " crop boxes; width " << (w.holds ? "dominated" : "NOT dominated") << " (" << w.strict
    << "/" << w.checked << " strict), height " << (h.holds ? "dominated" : "NOT dominated")
    << " (" << h.strict << "/" << h.checked << " strict) on the percentile grid; exact CDF "
    << (exact ? "below" : "NOT below") << " at every sample; " << Format("%.1f s", secs);
  return {exact && w.holds && h.holds && w.strict > 0 && h.strict > 0 && secs < 60.0, d.str()};
}

Outcome CheckMetricOracles() {
  Rng rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto f = testing::RandomApFixture(rng);
    for (double t : {0.5, 0.75}) {
      worst = std::max(worst, std::abs(*AveragePrecision(f.dets, f.gts, t) -
                                       testing::BruteForceAp(f.dets, f.gts, t)));
    }
  }
  int pck_mismatch = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto f = testing::RandomPckFixture(rng);
    const PckCount lib = DatasetPck(f.preds, f.gt, 0.05);
    const PckCount ref = testing::TallyPck(f.preds, f.gt, 0.05);
    if (lib.correct != ref.correct || lib.evaluated != ref.evaluated) ++pck_mismatch;
  }
  return {worst <= 1e-9 && pck_mismatch == 0,
          Format("max AP deviation %.3g over 1000 fixtures, %.0f PCK mismatches over 1000", worst,
                 pck_mismatch)};
}

Outcome CheckEndToEnd() {
  const SceneConfig cfg = testing::SmallSceneConfig(3, 320, 240);
  const SceneSpec scene = GenerateScene(cfg);
  DatasetManifest gt;
  for (std::size_t k = 0; k < scene.cameras.size(); ++k) {
    const std::int64_t image_id = static_cast<std::int64_t>(k) + 1;
    const RenderedFrame frame = Rasterize(scene, scene.cameras[k], image_id);
    gt.images.push_back({image_id, "f.png", frame.width, frame.height});
    for (AnnotationRecord& r : AnnotateFrame(scene, scene.cameras[k], frame)) {
      r.id = static_cast<std::int64_t>(gt.annotations.size()) + 1;
      gt.annotations.push_back(std::move(r));
    }
  }
  std::map<std::int64_t, std::vector<Keypoint>> exact, shifted;
  std::vector<Detection> dets;
  const double alpha = 0.05;
  for (const AnnotationRecord& r : gt.annotations) {
    exact[r.id] = r.keypoints;
    std::vector<Keypoint> moved = r.keypoints;
    for (Keypoint& k : moved) k.u += 1.01 * alpha * r.bbox.max_dim();
    shifted[r.id] = moved;
    dets.push_back({r.image_id, r.bbox, 1.0, 1});
  }
  const auto pck = DatasetPck(exact, gt, alpha).Value();
  const auto pck_shift = DatasetPck(shifted, gt, alpha).Value();
  const MeanAp ap = MeanAveragePrecision(dets, GroundTruthBoxes(gt));
  const bool ok = !gt.annotations.empty() && pck && *pck == 1.0 && pck_shift &&
                  *pck_shift == 0.0 && ap.map && *ap.map == 1.0;
  return {ok, Format("%.0f annotations: PCK@0.05 %.3f, perturbed %.3f", gt.annotations.size(),
                     pck.value_or(-1), pck_shift.value_or(-1)) +
                  Format(", mAP %.3f", ap.map.value_or(-1))};
}

Outcome CheckConstants() {
  bool ok = true;
  std::string detail;
  // Area threshold.
  AnnotationRecord a, b;
  a.bbox = {0, 0, 70, 70};
  b.bbox = {0, 0, 70, 72};
  const auto sel = SelectTargets({a, b}, 5000.0);
  ok &= sel == std::vector<std::size_t>{1};
  detail += sel == std::vector<std::size_t>{1} ? "4900 excluded, 5040 included" : "area boundary wrong";

  // Minimum labeled size: two real instances painted as 28 and 31 px wide boxes.
  const SceneSpec scene = GenerateScene(testing::SmallSceneConfig(1, 200, 120));
  RenderedFrame frame;
  frame.width = 200;
  frame.height = 120;
  frame.mask = InstanceMask(200, 120);
  const InstanceId first = scene.instances[0].id;
  const InstanceId second = scene.instances[1].id;
  for (int y = 10; y < 30; ++y) {
    for (int x = 10; x < 38; ++x) frame.mask.set(x, y, first);
    for (int x = 100; x < 131; ++x) frame.mask.set(x, y, second);
  }
  const auto recs = AnnotateFrame(scene, scene.cameras[0], frame, 30.0);
  const bool size_ok = recs.size() == 1 && recs[0].instance_id == second;
  ok &= size_ok;
  detail += size_ok ? "; 28 px skipped, 31 px labeled" : "; size filter wrong";

  // Padding offsets stay in [0, 150] and reach both ends.
  Rng rng(5);
  const PixelBox box{800, 400, 100, 100};
  int lo = 1000, hi = -1;
  bool in_range = true;
  for (int i = 0; i < 20000; ++i) {
    const PixelBox r = CropRegion(box, 1920, 1080, 150, rng);
    for (double off : {box.x - r.x, box.y - r.y, r.right() - box.right(), r.bottom() - box.bottom()}) {
      in_range &= off >= 0 && off <= 150 && off == std::floor(off);
      lo = std::min(lo, static_cast<int>(off));
      hi = std::max(hi, static_cast<int>(off));
    }
  }
  const PixelBox edge = CropRegion({0, 0, 50, 50}, 1920, 1080, 150, rng);
  in_range &= edge.x == 0 && edge.y == 0;
  ok &= in_range && lo == 0 && hi == 150;
  detail += in_range && lo == 0 && hi == 150 ? "; offsets span [0, 150]" : "; offsets out of range";
  return {ok, detail};
}

// Runs scene-gen, render, annotate, augment and split into `dir`.
bool RunPipeline(const fs::path& dir, const std::string& jobs) {
  const std::string d = dir.string();
  const std::vector<std::vector<std::string>> steps{
      {"-j", jobs, "scene-gen", "--out", d + "/scene.json", "--seed", "9", "--num-instances",
       "40", "--num-cameras", "4", "--extent", "25", "--width", "320", "--height", "180"},
      {"-j", jobs, "render", "--scene", d + "/scene.json", "--out-dir", d + "/render"},
      {"-j", jobs, "annotate", "--scene", d + "/scene.json", "--render-dir", d + "/render",
       "--out", d + "/render/gt.json", "--min-dim", "5"},
      {"-j", jobs, "augment", "--input", d + "/render/gt.json", "--out", d + "/render/aug.json",
       "--area-threshold", "139", "--max-offset", "25", "--output-width", "320",
       "--output-height", "180", "--seed", "7"},
      {"-j", jobs, "split", "--input", d + "/render/aug.json", "--train-out", d + "/train.json",
       "--val-out", d + "/val.json", "--seed", "3"},
  };
  for (const auto& args : steps) {
    std::ostringstream out, err;
    if (RunCli(args, out, err) != 0) {
      std::fprintf(stderr, "%s", err.str().c_str());
      return false;
    }
  }
  return true;
}

Outcome CheckDeterminism() {
  testing::TempDir a, b, c;
  if (!RunPipeline(a.path(), "1") || !RunPipeline(b.path(), "4") || !RunPipeline(c.path(), "4")) {
    return {false, "pipeline failed"};
  }
  int compared = 0;
  std::string differing;
  for (const char* f : {"scene.json", "render/masks", "render/frames", "render/depth",
                        "render/gt.json", "render/aug.json", "train.json", "val.json"}) {
    const std::string ha = Sha256Path(a / f);
    if (ha != Sha256Path(b / f) || ha != Sha256Path(c / f)) differing += std::string(" ") + f;
    ++compared;
  }
  if (!differing.empty()) return {false, "outputs differ:" + differing};
  return {true, std::to_string(compared) +
                    " artifacts byte-identical across --jobs 1, --jobs 4 and a repeat run"};
}

}  // namespace
}  // namespace herdsynth

int main() {
  using herdsynth::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> checks{
      {"weighted-aggregation", herdsynth::CheckAggregation},
      {"augmentation-bookkeeping", herdsynth::CheckBookkeeping},
      {"bbox-ratio-cdf-dominance", herdsynth::CheckCdfDominance},
      {"metric-oracle-equivalence", herdsynth::CheckMetricOracles},
      {"keypoint-pipeline-end-to-end", herdsynth::CheckEndToEnd},
      {"pipeline-constants", herdsynth::CheckConstants},
      {"determinism", herdsynth::CheckDeterminism},
  };
  int failures = 0;
  for (const auto& [name, check] : checks) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
