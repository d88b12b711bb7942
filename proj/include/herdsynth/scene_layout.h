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

// Procedural herd scenes: instances are drawn from a pose library, scaled,
// yawed and dropped into a region of the ground plane, rejecting any whose
// ground footprint collides with an earlier one. Cameras are then placed on
// a spherical cap around the herd centroid and aimed at it.
//
// World frame: z up, instances stand on z = bounds.min.z.

#ifndef HERDSYNTH_SCENE_LAYOUT_H_
#define HERDSYNTH_SCENE_LAYOUT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "herdsynth/geometry.h"

namespace herdsynth {

// One posed vertex cloud. group_of_vertex holds 1..27 for keypoint group
// members and 0 for plain surface vertices.
struct PosedModel {
  std::vector<Vec3> vertices;
  std::vector<std::uint8_t> group_of_vertex;
};

using PoseLibrary = std::vector<PosedModel>;

// Deterministic library of `count` quadruped stand-in poses (legs swinging,
// neck lowered or raised, tail swaying). Model frame: x forward, y left,
// z up, hooves near z = 0.
PoseLibrary MakeQuadrupedPoseLibrary(int count, std::uint64_t seed);

struct Placement {
  double yaw = 0.0;  // radians about world z
  Vec3 translation = Vec3::Zero();

  bool operator==(const Placement&) const = default;
};

struct SceneInstance {
  InstanceId id = 0;
  std::vector<Vec3> base_vertices;
  std::vector<std::uint8_t> group_of_vertex;
  double scale = 1.0;
  int pose_index = 0;
  Placement placement;

  Vec3 ToWorld(const Vec3& model_point) const;
  std::vector<Vec3> WorldVertices() const;
  Vec3 Centroid() const;

  bool operator==(const SceneInstance&) const = default;
};

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool operator==(const Aabb&) const = default;
};

// Axis-aligned ground-plane (x, y) footprint of the placed vertex cloud, in
// meters, expressed as a PixelBox so the same IoU routine applies.
PixelBox OccupancyBox(const SceneInstance& instance);

struct CameraRig {
  int width = 1920;
  int height = 1080;
  double hfov_deg = 60.0;
  double min_elevation_deg = 15.0;
  double max_elevation_deg = 90.0;

  bool operator==(const CameraRig&) const = default;
};

// Throws kConfiguration on an empty library, n < 1 or a bad scale range.
std::vector<SceneInstance> PlaceInstances(const PoseLibrary& library, int n, const Aabb& bounds,
                                          std::pair<double, double> scale_range,
                                          std::uint64_t seed);

// Throws kEmptyScene when `instances` is empty.
std::vector<CameraModel> PlaceCameras(const std::vector<SceneInstance>& instances, int k,
                                      std::pair<double, double> distance_range,
                                      std::uint64_t seed, const CameraRig& rig = {});

// Mean of the per-instance vertex centroids.
Vec3 HerdCentroid(const std::vector<SceneInstance>& instances);

struct SceneConfig {
  int num_instances = 250;
  int num_cameras = 3;
  int pose_library_size = 64;
  Aabb bounds{Vec3(-60.0, -60.0, 0.0), Vec3(60.0, 60.0, 0.0)};
  std::pair<double, double> scale_range{0.8, 1.2};
  std::pair<double, double> distance_range{20.0, 80.0};
  CameraRig rig;
  std::uint64_t seed = 0;

  bool operator==(const SceneConfig&) const = default;
};

struct SceneSpec {
  std::vector<SceneInstance> instances;
  std::vector<CameraModel> cameras;
  SceneConfig config;
  int attempted = 0;

  int discarded() const { return attempted - static_cast<int>(instances.size()); }
  const SceneInstance* FindInstance(InstanceId id) const;

  bool operator==(const SceneSpec&) const = default;
};

SceneSpec GenerateScene(const SceneConfig& config);

// Scene file: canonical JSON (sorted keys). See docs/scene_format.md.
std::string SceneToJson(const SceneSpec& scene);
SceneSpec SceneFromJson(const std::string& text);
void SaveScene(const SceneSpec& scene, const std::filesystem::path& path);
SceneSpec LoadScene(const std::filesystem::path& path);

}  // namespace herdsynth

#endif  // HERDSYNTH_SCENE_LAYOUT_H_
