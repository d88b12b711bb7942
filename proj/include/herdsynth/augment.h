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

// Targeted crop-and-scale augmentation. Every annotated animal whose bbox
// area exceeds a threshold gets a randomly padded crop around it, rescaled
// to the full output size; labels for the crop are regenerated from the
// upscaled instance mask.

#ifndef HERDSYNTH_AUGMENT_H_
#define HERDSYNTH_AUGMENT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "herdsynth/datasets.h"
#include "herdsynth/geometry.h"
#include "herdsynth/image_io.h"
#include "herdsynth/keypoints.h"
#include "herdsynth/rng.h"

namespace herdsynth {

struct AugmentConfig {
  double area_threshold = 5000.0;
  int max_offset = 150;
  int output_width = 1920;
  int output_height = 1080;
  int min_visible_pixels = 16;
  std::uint64_t seed = 0;

  void Validate() const;  // throws kConfiguration
};

// Indices of records with bbox area > area_threshold, in input order.
std::vector<std::size_t> SelectTargets(const std::vector<AnnotationRecord>& records,
                                       double area_threshold);

// bbox (snapped outward to whole pixels) grown by four independent offsets
// in [0, max_offset] drawn left, top, right, bottom, then clamped to the
// frame. Throws kInvalidArgument if the bbox misses the frame.
PixelBox CropRegion(const PixelBox& bbox, int frame_width, int frame_height, int max_offset,
                    Rng& rng);

// Nearest neighbour: output pixel i samples source column
// x0 + floor((i + 0.5) * region_w / out_w), likewise for rows.
InstanceMask ScaleMask(const InstanceMask& mask, const PixelBox& region, int out_width,
                       int out_height);
// Bilinear with pixel-center alignment, edge samples clamped to the region.
Image ScaleImage(const Image& image, const PixelBox& region, int out_width, int out_height);

struct CropSample {
  PixelBox region;
  InstanceId target_instance_id = 0;
  InstanceMask mask;
  std::optional<Image> image;
  std::vector<AnnotationRecord> records;  // image_id and id left at 0
};

// One crop around `target`. Instances with >= min_visible_pixels in the
// upscaled mask get a record; keypoints follow the crop's affine map and
// visibility is re-derived against the upscaled mask. Instances without a
// source record get a bbox-only record with unlabeled keypoints.
// Throws kConsistency if the target is missing from the mask.
CropSample CropAndScale(const InstanceMask& mask, const Image* image,
                        const std::vector<AnnotationRecord>& frame_records,
                        const AnnotationRecord& target, const AugmentConfig& cfg, Rng& rng);

// All crops for one frame, targets in record order, drawn from `rng`.
std::vector<CropSample> AugmentFrame(const InstanceMask& mask, const Image* image,
                                     const std::vector<AnnotationRecord>& frame_records,
                                     const AugmentConfig& cfg, Rng& rng);

struct FrameInput {
  InstanceMask mask;
  std::optional<Image> image;
};

using FrameLoader = std::function<FrameInput(const ImageEntry&)>;
// Receives every generated image entry with its crop, in output order.
using CropSink = std::function<void(const ImageEntry&, const CropSample&)>;

// Originals followed by every generated crop. Frame f draws from
// Rng(MixSeed(cfg.seed, image_id)), so output is independent of `jobs`.
// New image ids continue after the largest input id; crops inherit the
// source frame's video_id and split.
DatasetManifest AugmentDataset(const DatasetManifest& manifest, const FrameLoader& loader,
                               const CropSink& sink, const AugmentConfig& cfg, int jobs = 1);

}  // namespace herdsynth

#endif  // HERDSYNTH_AUGMENT_H_
