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

#include "herdsynth/keypoints.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "herdsynth/error.h"

namespace herdsynth {

using nlohmann::json;

int AnnotationRecord::NumLabeled() const {
  return static_cast<int>(std::count_if(keypoints.begin(), keypoints.end(),
                                        [](const Keypoint& k) { return k.visibility > 0; }));
}

void ValidateRecord(const AnnotationRecord& record, int width, int height) {
  HERDSYNTH_ENFORCE(record.bbox.w > 0.0 && record.bbox.h > 0.0, ErrorCode::kSchema,
                    "annotation " + std::to_string(record.id) + " has an empty bbox");
  HERDSYNTH_ENFORCE(static_cast<int>(record.keypoints.size()) == SchemaSize(record.schema),
                    ErrorCode::kSchema,
                    "annotation " + std::to_string(record.id) +
                        " keypoint count does not match its schema");
  for (const Keypoint& k : record.keypoints) {
    HERDSYNTH_ENFORCE(k.visibility >= 0 && k.visibility <= 2, ErrorCode::kSchema,
                      "keypoint visibility must be 0, 1 or 2");
    if (k.visibility == 2) {
      HERDSYNTH_ENFORCE(k.u >= 0.0 && k.v >= 0.0 && k.u < width && k.v < height,
                        ErrorCode::kSchema, "visible keypoint lies outside the frame");
    }
  }
}

Vec3 GroupCentroid(const SceneInstance& instance, int group) {
  HERDSYNTH_ENFORCE(group >= 1 && group <= kNumZebraKeypoints, ErrorCode::kSchema,
                    "keypoint group must lie in 1..27");
  Vec3 sum = Vec3::Zero();
  std::size_t count = 0;
  for (std::size_t i = 0; i < instance.base_vertices.size(); ++i) {
    if (instance.group_of_vertex[i] != group) continue;
    sum += instance.ToWorld(instance.base_vertices[i]);
    ++count;
  }
  HERDSYNTH_ENFORCE(count > 0, ErrorCode::kSchema,
                    "instance " + std::to_string(instance.id) + " has no vertices in group " +
                        std::to_string(group));
  return sum / static_cast<double>(count);
}

int ClassifyVisibility(double u, double v, const InstanceMask& mask, InstanceId instance_id) {
  const double fx = std::floor(u);
  const double fy = std::floor(v);
  if (!(fx >= 0.0 && fy >= 0.0 && fx < mask.width() && fy < mask.height())) return 1;
  return mask.at(static_cast<int>(fx), static_cast<int>(fy)) == instance_id ? 2 : 1;
}

namespace {

struct BoxAccum {
  int x0 = std::numeric_limits<int>::max();
  int y0 = std::numeric_limits<int>::max();
  int x1 = -1;
  int y1 = -1;
  std::size_t pixels = 0;
};

// Single pass over the mask instead of one MaskToBox scan per instance.
std::map<InstanceId, BoxAccum> CollectBoxes(const InstanceMask& mask) {
  std::map<InstanceId, BoxAccum> boxes;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const InstanceId id = mask.at(x, y);
      if (id == 0) continue;
      BoxAccum& b = boxes[id];
      b.x0 = std::min(b.x0, x);
      b.y0 = std::min(b.y0, y);
      b.x1 = std::max(b.x1, x);
      b.y1 = std::max(b.y1, y);
      ++b.pixels;
    }
  }
  return boxes;
}

}  // namespace

std::vector<AnnotationRecord> AnnotateFrame(const SceneSpec& scene, const CameraModel& cam,
                                            const RenderedFrame& frame, double min_dim) {
  HERDSYNTH_ENFORCE(frame.width == cam.width() && frame.height == cam.height() &&
                        frame.mask.width() == frame.width && frame.mask.height() == frame.height,
                    ErrorCode::kConsistency, "frame size does not match the camera");
  std::vector<AnnotationRecord> records;
  for (const auto& [id, acc] : CollectBoxes(frame.mask)) {
    const SceneInstance* inst = scene.FindInstance(id);
    HERDSYNTH_ENFORCE(inst != nullptr, ErrorCode::kConsistency,
                      "mask instance " + std::to_string(id) + " is not part of the scene");
    const PixelBox box{static_cast<double>(acc.x0), static_cast<double>(acc.y0),
                       static_cast<double>(acc.x1 - acc.x0 + 1),
                       static_cast<double>(acc.y1 - acc.y0 + 1)};
    if (box.max_dim() <= min_dim) continue;

    AnnotationRecord rec;
    rec.image_id = frame.image_id;
    rec.instance_id = id;
    rec.bbox = box;
    rec.area = static_cast<double>(acc.pixels);
    rec.schema = SchemaTag::kZebra27;
    rec.segmentation.mask_id = id;
    rec.keypoints.resize(kNumZebraKeypoints);
    for (int slot = 0; slot < kNumZebraKeypoints; ++slot) {
      const Vec3 centroid = GroupCentroid(*inst, slot + 1);
      Keypoint& kp = rec.keypoints[static_cast<std::size_t>(slot)];
      try {
        const Projection p = Project(centroid, cam);
        kp = {p.u, p.v, ClassifyVisibility(p.u, p.v, frame.mask, id)};
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kBehindCamera) throw;
        kp = {0.0, 0.0, 0};
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

// --- schema mapping -------------------------------------------------------

void SchemaMapping::Validate() const {
  const int ns = SchemaSize(source);
  const int nt = SchemaSize(target);
  std::set<int> seen_src;
  std::set<int> seen_dst;
  for (const auto& [s, t] : pairs) {
    HERDSYNTH_ENFORCE(s >= 0 && s < ns && t >= 0 && t < nt, ErrorCode::kMapping,
                      "mapping slot out of range");
    HERDSYNTH_ENFORCE(seen_src.insert(s).second && seen_dst.insert(t).second,
                      ErrorCode::kMapping, "mapping is not injective");
  }
}

SchemaMapping SchemaMapping::Inverse() const {
  SchemaMapping inv{target, source, {}};
  for (const auto& [s, t] : pairs) inv.pairs.emplace_back(t, s);
  return inv;
}

SchemaMapping DefaultMapping17To27() {
  return SchemaMapping{SchemaTag::kQuadruped17,
                       SchemaTag::kZebra27,
                       {
                           {0, kLeftEye},    // left_eye
                           {1, kRightEye},   // right_eye
                           {2, kNose},       // nose
                           {3, kNeckStart},  // neck
                           {4, kTailStart},  // root_of_tail
                           {5, kThighLF},    // left_shoulder
                           {6, kKneeLF},     // left_elbow
                           {7, kHoofLF},     // left_front_paw
                           {8, kThighRF},    // right_shoulder
                           {9, kKneeRF},     // right_elbow
                           {10, kHoofRF},    // right_front_paw
                           {11, kThighLB},   // left_hip
                           {12, kKneeLB},    // left_knee
                           {13, kHoofLB},    // left_back_paw
                           {14, kThighRB},   // right_hip
                           {15, kKneeRB},    // right_knee
                           {16, kHoofRB},    // right_back_paw
                       }};
}

namespace {

int SlotByName(SchemaTag tag, const std::string& name) {
  const std::vector<std::string> names = SchemaKeypointNames(tag);
  const auto it = std::find(names.begin(), names.end(), name);
  HERDSYNTH_ENFORCE(it != names.end(), ErrorCode::kMapping,
                    "unknown keypoint '" + name + "' in schema " +
                        std::string(SchemaName(tag)));
  return static_cast<int>(it - names.begin());
}

SchemaTag SchemaByName(const std::string& name) {
  const auto tag = SchemaFromName(name);
  HERDSYNTH_ENFORCE(tag.has_value(), ErrorCode::kMapping, "unknown schema '" + name + "'");
  return *tag;
}

}  // namespace

SchemaMapping SchemaMappingFromJson(const std::string& text) {
  try {
    const json doc = json::parse(text);
    SchemaMapping m;
    m.source = SchemaByName(doc.at("source").get<std::string>());
    m.target = SchemaByName(doc.at("target").get<std::string>());
    for (const json& p : doc.at("pairs")) {
      HERDSYNTH_ENFORCE(p.is_array() && p.size() == 2, ErrorCode::kMapping,
                        "mapping pairs must be [source, target]");
      m.pairs.emplace_back(SlotByName(m.source, p[0].get<std::string>()),
                           SlotByName(m.target, p[1].get<std::string>()));
    }
    m.Validate();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMapping, std::string("schema mapping: ") + e.what());
  }
}

std::string SchemaMappingToJson(const SchemaMapping& mapping) {
  const std::vector<std::string> src = SchemaKeypointNames(mapping.source);
  const std::vector<std::string> dst = SchemaKeypointNames(mapping.target);
  json pairs = json::array();
  for (const auto& [s, t] : mapping.pairs) {
    pairs.push_back({src[static_cast<std::size_t>(s)], dst[static_cast<std::size_t>(t)]});
  }
  const json doc{{"source", SchemaName(mapping.source)},
                 {"target", SchemaName(mapping.target)},
                 {"pairs", pairs}};
  return doc.dump(2) + "\n";
}

SchemaMapping LoadSchemaMapping(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  HERDSYNTH_ENFORCE(in.good(), ErrorCode::kIo, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return SchemaMappingFromJson(ss.str());
}

AnnotationRecord MapSchema(const AnnotationRecord& record, const SchemaMapping& mapping) {
  HERDSYNTH_ENFORCE(record.schema == mapping.source, ErrorCode::kMapping,
                    "record schema " + std::string(SchemaName(record.schema)) +
                        " does not match mapping source " +
                        std::string(SchemaName(mapping.source)));
  HERDSYNTH_ENFORCE(static_cast<int>(record.keypoints.size()) == SchemaSize(mapping.source),
                    ErrorCode::kMapping, "record keypoint count does not match its schema");
  mapping.Validate();
  AnnotationRecord out = record;
  out.schema = mapping.target;
  out.keypoints.assign(static_cast<std::size_t>(SchemaSize(mapping.target)), Keypoint{});
  for (const auto& [s, t] : mapping.pairs) {
    out.keypoints[static_cast<std::size_t>(t)] = record.keypoints[static_cast<std::size_t>(s)];
  }
  return out;
}

}  // namespace herdsynth
