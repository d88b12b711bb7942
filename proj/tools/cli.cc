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

#include "herdsynth/cli.h"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "herdsynth/augment.h"
#include "herdsynth/datasets.h"
#include "herdsynth/error.h"
#include "herdsynth/image_io.h"
#include "herdsynth/keypoints.h"
#include "herdsynth/metrics.h"
#include "herdsynth/mock_render.h"
#include "herdsynth/parallel.h"
#include "herdsynth/scene_layout.h"
#include "herdsynth/version.h"

namespace herdsynth {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::string HexDigest(const unsigned char* md, unsigned int len) {
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 15]);
  }
  return out;
}

std::string Sha256Bytes(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  HERDSYNTH_ENFORCE(EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) == 1,
                    ErrorCode::kIo, "sha256 failed");
  return HexDigest(md, len);
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  HERDSYNTH_ENFORCE(in.good(), ErrorCode::kIo, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  HERDSYNTH_ENFORCE(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  HERDSYNTH_ENFORCE(out.good(), ErrorCode::kIo, "write failed: " + path.string());
}

// Line-delimited JSON log on stderr, only with --verbose.
class Log {
 public:
  Log(std::ostream& err, const bool& verbose) : err_(err), verbose_(verbose) {}
  void operator()(const std::string& event, json fields = json::object()) const {
    if (!verbose_) return;
    fields["event"] = event;
    err_ << fields.dump() << "\n";
  }

 private:
  std::ostream& err_;
  const bool& verbose_;
};

// Shared state for one invocation.
struct Context {
  std::vector<std::string> args;
  std::ostream& out;
  std::ostream& err;
  bool verbose = false;
  int jobs = 0;
  Log log{err, verbose};
};

// Writes `<output>.run.json` (or `<dir>/run.json` for directory outputs).
void WriteRunManifest(const Context& ctx, const std::string& subcommand, const fs::path& output,
                      const json& config, std::optional<std::uint64_t> seed,
                      const std::vector<fs::path>& inputs) {
  json digests = json::object();
  for (const fs::path& in : inputs) digests[in.string()] = Sha256Path(in);
  json doc{{"tool", "herdsynth"},
           {"version", Version()},
           {"subcommand", subcommand},
           {"argv", ctx.args},
           {"config", config},
           {"inputs", digests},
           {"seed", seed ? json(*seed) : json(nullptr)}};
  const fs::path path = fs::is_directory(output) ? output / "run.json"
                                                 : fs::path(output.string() + ".run.json");
  WriteFile(path, doc.dump(2) + "\n");
  ctx.log("run_manifest", {{"path", path.string()}});
}

std::string FrameStem(std::size_t camera) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "cam%03zu", camera);
  return buf;
}

std::string MetricName(const char* prefix, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%g", prefix, v);
  return buf;
}

std::vector<DatasetManifest> LoadAll(const std::vector<std::string>& paths) {
  std::vector<DatasetManifest> out;
  for (const std::string& p : paths) out.push_back(LoadCoco(p));
  return out;
}

std::string NameOf(const DatasetManifest& m, const std::string& path) {
  return m.name.empty() ? fs::path(path).stem().string() : m.name;
}

std::vector<fs::path> Paths(const std::vector<std::string>& v) {
  return std::vector<fs::path>(v.begin(), v.end());
}

// --- subcommands ------------------------------------------------------------

void AddSceneGen(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("scene-gen", "Generate a collision-free herd and camera poses");
  struct Opts {
    std::string out;
    SceneConfig cfg;
    double extent = 60.0;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--out", o->out, "Scene JSON path")->required();
  cmd->add_option("--seed", o->cfg.seed, "Random seed")->capture_default_str();
  cmd->add_option("--num-instances", o->cfg.num_instances, "Placement attempts")
      ->capture_default_str();
  cmd->add_option("--num-cameras", o->cfg.num_cameras, "Cameras per scene")->capture_default_str();
  cmd->add_option("--pose-library-size", o->cfg.pose_library_size, "Distinct poses")
      ->capture_default_str();
  cmd->add_option("--extent", o->extent, "Half-size of the square ground area, meters")
      ->capture_default_str();
  cmd->add_option("--distance-min", o->cfg.distance_range.first, "Camera distance, meters")
      ->capture_default_str();
  cmd->add_option("--distance-max", o->cfg.distance_range.second, "Camera distance, meters")
      ->capture_default_str();
  cmd->add_option("--width", o->cfg.rig.width, "Image width")->capture_default_str();
  cmd->add_option("--height", o->cfg.rig.height, "Image height")->capture_default_str();
  cmd->add_option("--hfov", o->cfg.rig.hfov_deg, "Horizontal field of view, degrees")
      ->capture_default_str();
  cmd->callback([o, &ctx] {
    o->cfg.bounds = Aabb{Vec3(-o->extent, -o->extent, 0.0), Vec3(o->extent, o->extent, 0.0)};
    const SceneSpec scene = GenerateScene(o->cfg);
    SaveScene(scene, o->out);
    ctx.out << "placed " << scene.instances.size() << " of " << scene.attempted
            << " instances (" << scene.discarded() << " discarded), " << scene.cameras.size()
            << " cameras -> " << o->out << "\n";
    const json config{{"num_instances", o->cfg.num_instances},
                      {"num_cameras", o->cfg.num_cameras},
                      {"pose_library_size", o->cfg.pose_library_size},
                      {"extent", o->extent},
                      {"distance_range", {o->cfg.distance_range.first, o->cfg.distance_range.second}},
                      {"width", o->cfg.rig.width},
                      {"height", o->cfg.rig.height},
                      {"hfov", o->cfg.rig.hfov_deg}};
    WriteRunManifest(ctx, "scene-gen", o->out, config, o->cfg.seed, {});
  });
}

void AddRender(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("render", "Rasterize masks, depth and previews for every camera");
  struct Opts {
    std::string scene;
    std::string out_dir;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--scene", o->scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", o->out_dir, "Output directory")->required();
  cmd->callback([o, &ctx] {
    const SceneSpec scene = LoadScene(o->scene);
    const std::vector<InstancePrimitives> prims = FitScenePrimitives(scene);
    const fs::path root(o->out_dir);
    for (const char* sub : {"frames", "masks", "depth"}) fs::create_directories(root / sub);
    ParallelFor(scene.cameras.size(), ResolveJobs(ctx.jobs), [&](std::size_t k) {
      const RenderedFrame frame =
          Rasterize(scene, scene.cameras[k], prims, static_cast<std::int64_t>(k) + 1);
      const std::string stem = FrameStem(k);
      WriteMaskPng(frame.mask, root / "masks" / (stem + ".png"));
      WriteImagePng(ShadeFrame(frame), root / "frames" / (stem + ".png"));
      WriteDepthGrid(frame.width, frame.height, frame.depth, root / "depth" / (stem + ".depth"));
    });
    ctx.out << "rendered " << scene.cameras.size() << " frames -> " << o->out_dir << "\n";
    WriteRunManifest(ctx, "render", root, json::object(), std::nullopt, {o->scene});
  });
}

void AddAnnotate(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("annotate", "Derive COCO records from rendered masks");
  struct Opts {
    std::string scene;
    std::string render_dir;
    std::string out;
    double min_dim = 30.0;
    std::optional<std::int64_t> video_id;
    std::int64_t image_id_base = 1;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--scene", o->scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--render-dir", o->render_dir, "Directory written by render")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--out", o->out, "Manifest path")->required();
  cmd->add_option("--min-dim", o->min_dim, "Skip instances with max(w, h) <= this")
      ->capture_default_str();
  cmd->add_option("--video-id", o->video_id, "Video id for every frame (default: scene seed)");
  cmd->add_option("--image-id-base", o->image_id_base, "Id of the first frame")
      ->capture_default_str();
  cmd->callback([o, &ctx] {
    const SceneSpec scene = LoadScene(o->scene);
    const fs::path root(o->render_dir);
    const std::size_t n = scene.cameras.size();
    std::vector<std::vector<AnnotationRecord>> per_frame(n);
    ParallelFor(n, ResolveJobs(ctx.jobs), [&](std::size_t k) {
      RenderedFrame frame;
      frame.image_id = o->image_id_base + static_cast<std::int64_t>(k);
      frame.mask = ReadMaskPng(root / "masks" / (FrameStem(k) + ".png"));
      frame.width = frame.mask.width();
      frame.height = frame.mask.height();
      per_frame[k] = AnnotateFrame(scene, scene.cameras[k], frame, o->min_dim);
    });
    DatasetManifest m;
    m.name = fs::path(o->out).stem().string();
    const std::int64_t video =
        o->video_id ? *o->video_id : static_cast<std::int64_t>(scene.config.seed);
    std::int64_t next_ann = 1;
    for (std::size_t k = 0; k < n; ++k) {
      ImageEntry img;
      img.id = o->image_id_base + static_cast<std::int64_t>(k);
      img.file_name = "frames/" + FrameStem(k) + ".png";
      img.mask_file = "masks/" + FrameStem(k) + ".png";
      img.width = scene.cameras[k].width();
      img.height = scene.cameras[k].height();
      img.video_id = video;
      m.images.push_back(img);
      for (AnnotationRecord& rec : per_frame[k]) {
        rec.id = next_ann++;
        m.annotations.push_back(std::move(rec));
      }
    }
    SaveCoco(m, o->out);
    ctx.out << "annotated " << m.annotations.size() << " instances in " << n << " frames -> "
            << o->out << "\n";
    WriteRunManifest(ctx, "annotate", o->out,
                     {{"min_dim", o->min_dim}, {"video_id", video},
                      {"image_id_base", o->image_id_base}},
                     std::nullopt, {o->scene, o->render_dir});
  });
}

void AddAugment(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("augment", "Targeted crop-and-scale augmentation");
  struct Opts {
    std::string input;
    std::string out;
    std::string input_root;
    std::string out_root;
    AugmentConfig cfg;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--input", o->input, "Source manifest")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o->out, "Augmented manifest")->required();
  cmd->add_option("--input-root", o->input_root, "Root of source files (default: manifest dir)");
  cmd->add_option("--out-root", o->out_root, "Root for generated files (default: output dir)");
  cmd->add_option("--area-threshold", o->cfg.area_threshold, "Minimum bbox area, px^2")
      ->capture_default_str();
  cmd->add_option("--max-offset", o->cfg.max_offset, "Maximum padding per side, px")
      ->capture_default_str();
  cmd->add_option("--output-width", o->cfg.output_width)->capture_default_str();
  cmd->add_option("--output-height", o->cfg.output_height)->capture_default_str();
  cmd->add_option("--min-visible-pixels", o->cfg.min_visible_pixels)->capture_default_str();
  cmd->add_option("--seed", o->cfg.seed, "Random seed")->capture_default_str();
  cmd->callback([o, &ctx] {
    const DatasetManifest src = LoadCoco(o->input);
    const fs::path in_root =
        o->input_root.empty() ? fs::path(o->input).parent_path() : fs::path(o->input_root);
    const fs::path out_root =
        o->out_root.empty() ? fs::path(o->out).parent_path() : fs::path(o->out_root);
    const FrameLoader loader = [&](const ImageEntry& img) {
      HERDSYNTH_ENFORCE(img.mask_file.has_value(), ErrorCode::kConsistency,
                        "image " + std::to_string(img.id) + " has no mask_file");
      FrameInput f;
      f.mask = ReadMaskPng(in_root / *img.mask_file);
      const fs::path pixels = in_root / img.file_name;
      if (fs::exists(pixels)) f.image = ReadImagePng(pixels);
      return f;
    };
    const CropSink sink = [&](const ImageEntry& entry, const CropSample& crop) {
      WriteMaskPng(crop.mask, out_root / *entry.mask_file);
      if (crop.image) WriteImagePng(*crop.image, out_root / entry.file_name);
      ctx.log("crop", {{"image_id", entry.id},
                       {"source_image_id", entry.provenance->source_image_id},
                       {"records", crop.records.size()}});
    };
    const DatasetManifest out = AugmentDataset(src, loader, sink, o->cfg, ResolveJobs(ctx.jobs));
    SaveCoco(out, o->out);
    ctx.out << "augmented " << src.images.size() << " frames with "
            << out.images.size() - src.images.size() << " crops -> " << o->out << "\n";
    WriteRunManifest(ctx, "augment", o->out,
                     {{"area_threshold", o->cfg.area_threshold},
                      {"max_offset", o->cfg.max_offset},
                      {"output_size", {o->cfg.output_width, o->cfg.output_height}},
                      {"min_visible_pixels", o->cfg.min_visible_pixels}},
                     o->cfg.seed, {o->input});
  });
}

void AddSplit(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("split", "Video-aware train/val split");
  struct Opts {
    std::string input;
    std::string train_out;
    std::string val_out;
    double ratio = 0.8;
    std::uint64_t seed = 0;
    bool largest_first = false;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--input", o->input)->required()->check(CLI::ExistingFile);
  cmd->add_option("--train-out", o->train_out)->required();
  cmd->add_option("--val-out", o->val_out)->required();
  cmd->add_option("--ratio", o->ratio, "Train fraction")->capture_default_str();
  cmd->add_option("--seed", o->seed)->capture_default_str();
  cmd->add_flag("--largest-first", o->largest_first, "Assign the longest videos first");
  cmd->callback([o, &ctx] {
    const SplitResult r = SplitByVideo(LoadCoco(o->input), o->ratio, o->seed, o->largest_first);
    for (const std::string& w : r.warnings) ctx.err << "warning: " << w << "\n";
    SaveCoco(r.train, o->train_out);
    SaveCoco(r.val, o->val_out);
    ctx.out << "train " << r.train.images.size() << " images, val " << r.val.images.size()
            << " images\n";
    const json config{{"ratio", o->ratio}, {"largest_first", o->largest_first}};
    WriteRunManifest(ctx, "split", o->train_out, config, o->seed, {o->input});
    WriteRunManifest(ctx, "split", o->val_out, config, o->seed, {o->input});
  });
}

void AddConvert(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("convert", "Export labels to another format");
  struct Opts {
    std::string input;
    std::string format = "yolo";
    std::string out_dir;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--input", o->input)->required()->check(CLI::ExistingFile);
  cmd->add_option("--format", o->format)->check(CLI::IsMember({"yolo"}))->capture_default_str();
  cmd->add_option("--out-dir", o->out_dir)->required();
  cmd->callback([o, &ctx] {
    const auto files = ConvertYolo(LoadCoco(o->input), o->out_dir);
    ctx.out << "wrote " << files.size() << " label files -> " << o->out_dir << "\n";
    WriteRunManifest(ctx, "convert", o->out_dir, {{"format", o->format}}, std::nullopt,
                     {o->input});
  });
}

void AddMerge(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("merge", "Concatenate manifests");
  struct Opts {
    std::vector<std::string> inputs;
    std::string out;
    std::string target_schema;
    std::vector<std::string> mappings;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--input", o->inputs, "Manifest (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o->out)->required();
  cmd->add_option("--target-schema", o->target_schema)
      ->check(CLI::IsMember({"none", "quadruped17", "zebra27"}));
  cmd->add_option("--mapping", o->mappings, "Schema mapping JSON (repeatable)")
      ->check(CLI::ExistingFile);
  cmd->callback([o, &ctx] {
    std::vector<SchemaMapping> maps;
    for (const std::string& p : o->mappings) maps.push_back(LoadSchemaMapping(p));
    std::optional<SchemaTag> target;
    if (!o->target_schema.empty()) target = SchemaFromName(o->target_schema);
    const MergeResult r = Merge(LoadAll(o->inputs), target, maps);
    for (const std::string& d : r.duplicate_file_paths) {
      ctx.err << "warning: duplicate file path " << d << "\n";
    }
    SaveCoco(r.manifest, o->out);
    ctx.out << "merged " << o->inputs.size() << " manifests into " << r.manifest.name << " ("
            << r.manifest.images.size() << " images)\n";
    std::vector<std::string> inputs = o->inputs;
    inputs.insert(inputs.end(), o->mappings.begin(), o->mappings.end());
    WriteRunManifest(ctx, "merge", o->out, {{"target_schema", o->target_schema}}, std::nullopt,
                     Paths(inputs));
  });
}

struct EvalPairs {
  std::vector<std::string> gt;
  std::vector<std::string> pred;
  std::vector<std::string> names;
  std::string out;
};

void AddEvalPairOptions(CLI::App* cmd, EvalPairs& p) {
  cmd->add_option("--gt", p.gt, "Ground-truth manifest (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--pred", p.pred, "COCO results JSON, one per --gt")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--name", p.names, "Dataset label, one per --gt");
  cmd->add_option("--out", p.out, "Report JSON");
}

void FinishReport(Context& ctx, const std::string& sub, const EvalPairs& p,
                  const EvalReport& report, const json& config) {
  ctx.out << ReportToTable(report);
  if (p.out.empty()) return;
  WriteFile(p.out, ReportToJson(report));
  std::vector<std::string> inputs = p.gt;
  inputs.insert(inputs.end(), p.pred.begin(), p.pred.end());
  WriteRunManifest(ctx, sub, p.out, config, std::nullopt, Paths(inputs));
}

void CheckPairs(const EvalPairs& p) {
  HERDSYNTH_ENFORCE(p.gt.size() == p.pred.size(), ErrorCode::kConfiguration,
                    "--gt and --pred must be given the same number of times");
  HERDSYNTH_ENFORCE(p.names.empty() || p.names.size() == p.gt.size(), ErrorCode::kConfiguration,
                    "--name must be given once per --gt");
}

void AddEvalDet(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("eval-det", "Detection mAP50 and mAP@[.5:.95]");
  auto p = std::make_shared<EvalPairs>();
  AddEvalPairOptions(cmd, *p);
  cmd->callback([p, &ctx] {
    CheckPairs(*p);
    std::vector<DatasetScores> scores;
    for (std::size_t i = 0; i < p->gt.size(); ++i) {
      const DatasetManifest gt = LoadCoco(p->gt[i]);
      const MeanAp ap =
          MeanAveragePrecision(DetectionsFromJson(ReadFile(p->pred[i])), GroundTruthBoxes(gt));
      scores.push_back({p->names.empty() ? NameOf(gt, p->gt[i]) : p->names[i],
                        static_cast<std::int64_t>(gt.images.size()),
                        {{"mAP50", ap.map50}, {"mAP", ap.map}}});
    }
    FinishReport(ctx, "eval-det", *p, Aggregate(scores, {"mAP50", "mAP"}), json::object());
  });
}

void AddEvalPose(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("eval-pose", "PCK at one or more alphas");
  struct Opts {
    EvalPairs pairs;
    std::vector<double> alphas{0.05, 0.1};
    bool filtered = false;
    bool visible_only = false;
  };
  auto o = std::make_shared<Opts>();
  AddEvalPairOptions(cmd, o->pairs);
  cmd->add_option("--alpha", o->alphas, "Threshold fraction of max(w, h) (repeatable)")
      ->capture_default_str();
  cmd->add_flag("--filtered", o->filtered, "Exclude thighs and tail start");
  cmd->add_flag("--visible-only", o->visible_only, "Evaluate visibility-2 keypoints only");
  cmd->callback([o, &ctx] {
    CheckPairs(o->pairs);
    std::vector<std::string> metrics;
    for (double a : o->alphas) metrics.push_back(MetricName("P_", a));
    std::vector<DatasetScores> scores;
    for (std::size_t i = 0; i < o->pairs.gt.size(); ++i) {
      const DatasetManifest gt = LoadCoco(o->pairs.gt[i]);
      const auto preds = AssignKeypointPredictions(
          KeypointPredictionsFromJson(ReadFile(o->pairs.pred[i])), gt);
      const std::vector<bool> mask =
          o->filtered ? EvalMaskFiltered(gt.schema) : EvalMaskAll(gt.schema);
      DatasetScores s{o->pairs.names.empty() ? NameOf(gt, o->pairs.gt[i]) : o->pairs.names[i],
                      static_cast<std::int64_t>(gt.images.size()),
                      {}};
      for (std::size_t a = 0; a < o->alphas.size(); ++a) {
        s.values[metrics[a]] = DatasetPck(preds, gt, o->alphas[a], mask, o->visible_only).Value();
      }
      scores.push_back(std::move(s));
    }
    FinishReport(ctx, "eval-pose", o->pairs, Aggregate(scores, metrics),
                 {{"alphas", o->alphas}, {"filtered", o->filtered},
                  {"visible_only", o->visible_only}});
  });
}

void AddStats(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("stats", "Bounding-box size statistics");
  struct Opts {
    std::vector<std::string> inputs;
    std::vector<std::string> cdf;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--input", o->inputs, "Manifest (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--cdf", o->cdf, "CSV of sorted bbox/image size ratios, one per --input");
  cmd->callback([o, &ctx] {
    HERDSYNTH_ENFORCE(o->cdf.empty() || o->cdf.size() == o->inputs.size(),
                      ErrorCode::kConfiguration, "--cdf must be given once per --input");
    for (std::size_t i = 0; i < o->inputs.size(); ++i) {
      const DatasetManifest m = LoadCoco(o->inputs[i]);
      const RatioSamples r = BboxRatioCdf(m);
      ctx.out << NameOf(m, o->inputs[i]) << ": " << m.images.size() << " images, "
              << m.annotations.size() << " annotations";
      if (!r.width_ratios.empty()) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), ", median width ratio %.4f, median height ratio %.4f",
                      EmpiricalQuantile(r.width_ratios, 0.5),
                      EmpiricalQuantile(r.height_ratios, 0.5));
        ctx.out << buf;
      }
      ctx.out << "\n";
      if (!o->cdf.empty()) {
        WriteFile(o->cdf[i], RatioSamplesCsv(r));
        WriteRunManifest(ctx, "stats", o->cdf[i], json::object(), std::nullopt,
                         {o->inputs[i]});
      }
    }
  });
}

void AddReplay(CLI::App& app, Context& ctx, int& status) {
  auto* cmd = app.add_subcommand("replay", "Re-run the command recorded in a run manifest");
  auto path = std::make_shared<std::string>();
  cmd->add_option("run_manifest", *path)->required()->check(CLI::ExistingFile);
  cmd->callback([path, &ctx, &status] {
    json doc;
    try {
      doc = json::parse(ReadFile(*path));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, *path + ": " + e.what());
    }
    const auto args = doc.at("argv").get<std::vector<std::string>>();
    HERDSYNTH_ENFORCE(!args.empty() && args.front() != "replay", ErrorCode::kConfiguration,
                      "run manifest does not record a replayable command");
    status = RunCli(args, ctx.out, ctx.err);
  });
}

}  // namespace

std::string Sha256Path(const fs::path& path) {
  if (!fs::is_directory(path)) return Sha256Bytes(ReadFile(path));
  std::vector<std::string> entries;
  for (const auto& e : fs::recursive_directory_iterator(path)) {
    if (!e.is_regular_file()) continue;
    entries.push_back(fs::relative(e.path(), path).generic_string() + " " +
                      Sha256Bytes(ReadFile(e.path())));
  }
  std::sort(entries.begin(), entries.end());
  std::string listing;
  for (const std::string& e : entries) listing += e + "\n";
  return Sha256Bytes(listing);
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{args, out, err};
  int status = 0;
  CLI::App app{"herdsynth: synthetic herd datasets, augmentation and evaluation", "herdsynth"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(Version()));
  app.add_flag("-v,--verbose", ctx.verbose, "JSON-lines log on stderr");
  app.add_option("-j,--jobs", ctx.jobs, "Worker threads (default: HERDSYNTH_JOBS or all cores)");
  for (auto add : {AddSceneGen, AddRender, AddAnnotate, AddAugment, AddSplit, AddConvert,
                   AddMerge, AddEvalDet, AddEvalPose, AddStats}) {
    add(app, ctx);
  }
  AddReplay(app, ctx, status);
  for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; })) {
    sub->fallthrough();
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
  } catch (const Error& e) {
    err << json{{"error", ErrorCodeName(e.code())}, {"message", e.what()}}.dump() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return kExitRuntime;
  }
  return status;
}

}  // namespace herdsynth
