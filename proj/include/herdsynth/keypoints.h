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

// Ground-truth keypoint synthesis. Each of the 27 keypoints is the mean of a
// labeled vertex group, projected with the frame's camera. COCO visibility:
// 2 when the keypoint's pixel belongs to the instance's own mask, 1 otherwise
// (occluded or out of frame), 0 when it projects from behind the camera.

#ifndef HERDSYNTH_KEYPOINTS_H_
#define HERDSYNTH_KEYPOINTS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "herdsynth/geometry.h"
#include "herdsynth/keypoint_schema.h"
#include "herdsynth/mock_render.h"
#include "herdsynth/scene_layout.h"

namespace herdsynth {

struct Keypoint {
  double u = 0.0;
  double v = 0.0;
  int visibility = 0;  // 0 unlabeled, 1 labeled-occluded, 2 labeled-visible

  bool operator==(const Keypoint&) const = default;
};

struct Segmentation {
  std::optional<InstanceId> mask_id;
  std::vector<std::vector<double>> polygons;

  bool operator==(const Segmentation&) const = default;
};

// One animal in one image.
struct AnnotationRecord {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  InstanceId instance_id = 0;
  int category_id = 1;
  PixelBox bbox;
  double area = 0.0;
  SchemaTag schema = SchemaTag::kZebra27;
  std::vector<Keypoint> keypoints;
  Segmentation segmentation;

  int NumLabeled() const;
  bool operator==(const AnnotationRecord&) const = default;
};

// Checks positive bbox area, slot count vs schema, visibility range, and that
// visible keypoints fall inside [0, width) x [0, height). Throws kSchema.
void ValidateRecord(const AnnotationRecord& record, int width, int height);

// Mean of the placed, scaled member vertices of `group` (1..27), world frame.
// Throws kSchema for an empty or out-of-range group.
Vec3 GroupCentroid(const SceneInstance& instance, int group);

int ClassifyVisibility(double u, double v, const InstanceMask& mask, InstanceId instance_id);

// One record per instance present in the frame's mask whose mask box has
// max(w, h) > min_dim, in ascending instance id order. Throws kConsistency
// when the mask holds an id the scene does not know or the frame size does
// not match the camera.
std::vector<AnnotationRecord> AnnotateFrame(const SceneSpec& scene, const CameraModel& cam,
                                            const RenderedFrame& frame, double min_dim = 30.0);

// Slot correspondence between two schemas; must be injective both ways.
struct SchemaMapping {
  SchemaTag source = SchemaTag::kQuadruped17;
  SchemaTag target = SchemaTag::kZebra27;
  std::vector<std::pair<int, int>> pairs;  // (source slot, target slot)

  void Validate() const;  // throws kMapping
  SchemaMapping Inverse() const;
};

// eyes->eyes, nose->nose, neck->neck_start, root_of_tail->tail_start,
// shoulders->front thighs, elbows->front knees, front paws->front hoofs,
// hips->back thighs, knees->back knees, back paws->back hoofs.
SchemaMapping DefaultMapping17To27();

// JSON: {"source": name, "target": name, "pairs": [[src_kp, dst_kp], ...]}
// with keypoint names. See data/schema_map_17_27.json.
SchemaMapping SchemaMappingFromJson(const std::string& text);
std::string SchemaMappingToJson(const SchemaMapping& mapping);
SchemaMapping LoadSchemaMapping(const std::filesystem::path& path);

// Copies (u, v, visibility) per pair; unmapped target slots are unlabeled.
// Throws kMapping when the record's schema is not the mapping source.
AnnotationRecord MapSchema(const AnnotationRecord& record, const SchemaMapping& mapping);

}  // namespace herdsynth

#endif  // HERDSYNTH_KEYPOINTS_H_
