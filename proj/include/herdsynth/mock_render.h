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

// Desk-scale renderer. Each instance is stood in for by a handful of
// ellipsoids fitted to its keypoint-group centroids; frames are produced by
// casting one ray through every pixel center and keeping the nearest hit.
// Only geometric labels come out of this (instance ids, depth, and a flat
// shaded preview image); there is no appearance model.

#ifndef HERDSYNTH_MOCK_RENDER_H_
#define HERDSYNTH_MOCK_RENDER_H_

#include <cstdint>
#include <vector>

#include "herdsynth/geometry.h"
#include "herdsynth/image_io.h"
#include "herdsynth/scene_layout.h"

namespace herdsynth {

struct Ellipsoid {
  Vec3 center = Vec3::Zero();
  Mat3 axes = Mat3::Identity();  // columns are the unit principal axes
  Vec3 radii = Vec3::Ones();

  double BoundingRadius() const { return radii.maxCoeff(); }
};

struct InstancePrimitives {
  InstanceId id = 0;
  std::vector<Ellipsoid> ellipsoids;
};

struct RenderedFrame {
  std::int64_t image_id = 0;
  int width = 0;
  int height = 0;
  InstanceMask mask;
  std::vector<float> depth;  // meters, +inf where nothing was hit

  float DepthAt(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
};

// Body, neck, head, tail and leg-segment ellipsoids plus a small sphere on
// every keypoint-group centroid. Throws kSchema if a group has no vertices.
InstancePrimitives FitBodyPrimitives(const SceneInstance& instance);
std::vector<InstancePrimitives> FitScenePrimitives(const SceneSpec& scene);

// Z-buffer rasterization. Pixel rays pass through pixel centers; depth is the
// camera-frame z of the hit. Ties keep the earlier instance in `primitives`.
RenderedFrame Rasterize(const SceneSpec& scene, const CameraModel& cam,
                        const std::vector<InstancePrimitives>& primitives,
                        std::int64_t image_id = 0);
RenderedFrame Rasterize(const SceneSpec& scene, const CameraModel& cam,
                        std::int64_t image_id = 0);

// Flat gray preview: background 96, each instance a distinct shade darkened
// with depth. Stands in for the RGB frame in crop-and-scale.
Image ShadeFrame(const RenderedFrame& frame);

}  // namespace herdsynth

#endif  // HERDSYNTH_MOCK_RENDER_H_
