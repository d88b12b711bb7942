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

// COCO-style dataset manifests and the bookkeeping around them: canonical
// JSON I/O, YOLO label export, video-aware train/val splitting, merging, and
// bounding-box size statistics.
//
// The canonical JSON form (sorted keys, two-space indent, shortest
// round-tripping number formatting, UTF-8, trailing LF) is documented in
// docs/coco_canonical.md. save(load(save(m))) is byte-identical to save(m).

#ifndef HERDSYNTH_DATASETS_H_
#define HERDSYNTH_DATASETS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "herdsynth/geometry.h"
#include "herdsynth/keypoints.h"

namespace herdsynth {

// Links a generated crop back to the frame and animal it was made from.
struct CropProvenance {
  std::int64_t source_image_id = 0;
  InstanceId target_instance_id = 0;
  PixelBox crop_region;

  bool operator==(const CropProvenance&) const = default;
};

struct ImageEntry {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
  std::optional<std::int64_t> video_id;
  std::optional<std::string> split;
  std::optional<std::string> mask_file;
  std::optional<CropProvenance> provenance;

  bool operator==(const ImageEntry&) const = default;
};

struct Category {
  int id = 1;
  std::string name = "zebra";

  bool operator==(const Category&) const = default;
};

struct DatasetManifest {
  std::string name;
  SchemaTag schema = SchemaTag::kZebra27;
  std::vector<ImageEntry> images;
  std::vector<AnnotationRecord> annotations;
  std::vector<Category> categories{Category{}};

  // Unique image ids, no dangling annotation references, a single schema.
  // Throws kDanglingReference or kSchema.
  void Validate() const;
  const ImageEntry* FindImage(std::int64_t id) const;

  bool operator==(const DatasetManifest&) const = default;
};

std::string ToCocoJson(const DatasetManifest& manifest);
// `origin` only labels error messages. Throws kParse (with byte offset or
// JSON pointer), kDanglingReference, or kSchema.
DatasetManifest FromCocoJson(const std::string& text, const std::string& origin = "<memory>");
void SaveCoco(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest LoadCoco(const std::filesystem::path& path);

// "class cx cy w h", normalized by the image size after clamping the box to
// the frame, six decimals. Class = index of the category id among the
// manifest's sorted category ids. Throws kConversion on a zero-size image.
std::string YoloLine(const AnnotationRecord& record, const ImageEntry& image,
                     const DatasetManifest& manifest);
// One .txt per image (file_name with its extension replaced), possibly empty.
// Returns the written paths in image order.
std::vector<std::filesystem::path> ConvertYolo(const DatasetManifest& manifest,
                                               const std::filesystem::path& out_dir);

struct SplitResult {
  DatasetManifest train;
  DatasetManifest val;
  std::vector<std::string> warnings;
};

// Videos (images without a video_id count as singleton videos) are shuffled
// by `seed`, optionally reordered largest first, then assigned to train while
// the train image count is below ratio * total; the rest go to val.
// Throws kConfiguration unless 0 < ratio < 1.
SplitResult SplitByVideo(const DatasetManifest& manifest, double ratio, std::uint64_t seed,
                         bool largest_first = false);

struct MergeResult {
  DatasetManifest manifest;
  std::vector<std::string> duplicate_file_paths;  // sorted, each listed once
};

// Union of the inputs with image and annotation ids renumbered from 1 in
// input order; name = input names joined by '+'. Inputs whose schema differs
// from `target_schema` are converted with a matching mapping (or the inverse
// of one). With no target, all annotated inputs must share one schema.
// Throws kMerge.
MergeResult Merge(const std::vector<DatasetManifest>& manifests,
                  std::optional<SchemaTag> target_schema = std::nullopt,
                  const std::vector<SchemaMapping>& mappings = {});

struct RatioSamples {
  std::vector<double> width_ratios;   // ascending
  std::vector<double> height_ratios;  // ascending
};

// Per annotation: bbox w / image width and h / image height, each sorted.
RatioSamples BboxRatioCdf(const DatasetManifest& manifest);
// Columns: rank, cdf, width_ratio, height_ratio.
std::string RatioSamplesCsv(const RatioSamples& samples);

// Empirical quantile (inverse CDF, lower) of ascending samples at q in (0, 1].
double EmpiricalQuantile(const std::vector<double>& sorted, double q);

struct DominanceCheck {
  bool holds = false;   // candidate quantile >= reference quantile everywhere
  int strict = 0;       // quantiles where candidate > reference
  int checked = 0;
};

// Compares quantile functions on the grid q = k / steps, k = 1..steps-1.
// `candidate` dominating means its CDF lies at or below the reference CDF.
DominanceCheck QuantileDominance(const std::vector<double>& candidate_sorted,
                                 const std::vector<double>& reference_sorted, int steps = 100);

}  // namespace herdsynth

#endif  // HERDSYNTH_DATASETS_H_
