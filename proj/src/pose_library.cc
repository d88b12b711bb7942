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

#include <array>
#include <cmath>
#include <numbers>

#include "herdsynth/error.h"
#include "herdsynth/keypoint_schema.h"
#include "herdsynth/rng.h"
#include "herdsynth/scene_layout.h"

namespace herdsynth {
namespace {

struct PoseParams {
  std::array<double, 4> leg_swing{};  // LF, RF, RB, LB
  std::array<double, 4> knee_bend{};
  double neck_pitch = 0.0;
  double tail_lift = 0.2;
  double tail_sway = 0.0;
};

using Anatomy = std::array<Vec3, kNumZebraKeypoints>;

Vec3 SagittalDir(double angle_from_down) {
  return Vec3(-std::sin(angle_from_down), 0.0, -std::cos(angle_from_down));
}

Anatomy BuildAnatomy(const PoseParams& p) {
  Anatomy a;
  a[kBodyMiddle] = Vec3(0.0, 0.0, 1.15);
  a[kBackFront] = Vec3(0.50, 0.0, 1.32);
  a[kBackEnd] = Vec3(-0.55, 0.0, 1.30);

  // Legs in LF, RF, RB, LB order.
  const std::array<Vec3, 4> thighs = {Vec3(0.50, 0.18, 1.0), Vec3(0.50, -0.18, 1.0),
                                      Vec3(-0.55, -0.18, 1.0), Vec3(-0.55, 0.18, 1.0)};
  for (int leg = 0; leg < 4; ++leg) {
    const Vec3 knee = thighs[leg] + 0.50 * SagittalDir(p.leg_swing[leg]);
    const Vec3 hoof = knee + 0.45 * SagittalDir(p.leg_swing[leg] - p.knee_bend[leg]);
    a[kThighLF + leg] = thighs[leg];
    a[kKneeLF + leg] = knee;
    a[kHoofLF + leg] = hoof;
  }

  const double neck_angle = 0.9 + p.neck_pitch;
  const Vec3 neck_dir(std::cos(neck_angle), 0.0, std::sin(neck_angle));
  a[kNeckStart] = Vec3(0.70, 0.0, 1.35);
  a[kNeckEnd] = a[kNeckStart] + 0.55 * neck_dir;
  a[kSkull] = a[kNeckEnd] + 0.12 * neck_dir;
  const double face_angle = neck_angle - 1.4;
  const Vec3 face_dir(std::cos(face_angle), 0.0, std::sin(face_angle));
  a[kNose] = a[kSkull] + 0.50 * face_dir;
  a[kLeftEye] = a[kSkull] + 0.18 * face_dir + Vec3(0.0, 0.10, 0.0);
  a[kRightEye] = a[kSkull] + 0.18 * face_dir + Vec3(0.0, -0.10, 0.0);
  a[kLeftEarBase] = a[kSkull] + Vec3(-0.04, 0.07, 0.08);
  a[kRightEarBase] = a[kSkull] + Vec3(-0.04, -0.07, 0.08);
  a[kLeftEarTip] = a[kLeftEarBase] + Vec3(-0.05, 0.05, 0.16);
  a[kRightEarTip] = a[kRightEarBase] + Vec3(-0.05, -0.05, 0.16);

  a[kTailStart] = Vec3(-0.75, 0.0, 1.20);
  const Vec3 tail_dir =
      Vec3(-std::sin(p.tail_lift), std::sin(p.tail_sway), -std::cos(p.tail_lift)).normalized();
  a[kTailEnd] = a[kTailStart] + 0.60 * tail_dir;
  return a;
}

void AddSegment(PosedModel& model, const Vec3& from, const Vec3& to, int samples) {
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    model.vertices.push_back(from + t * (to - from));
    model.group_of_vertex.push_back(0);
  }
}

PosedModel BuildModel(const PoseParams& params) {
  const Anatomy a = BuildAnatomy(params);
  PosedModel model;

  // Six vertices around each keypoint location; their mean is the location.
  constexpr double kSpread = 0.02;
  for (int slot = 0; slot < kNumZebraKeypoints; ++slot) {
    for (int axis = 0; axis < 3; ++axis) {
      for (double sign : {1.0, -1.0}) {
        Vec3 v = a[slot];
        v[axis] += sign * kSpread;
        model.vertices.push_back(v);
        model.group_of_vertex.push_back(static_cast<std::uint8_t>(slot + 1));
      }
    }
  }

  // Barrel: Fibonacci samples on an ellipsoid around the body.
  constexpr int kBarrelSamples = 96;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < kBarrelSamples; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / kBarrelSamples;
    const double r = std::sqrt(1.0 - z * z);
    const double phi = golden * i;
    model.vertices.push_back(a[kBodyMiddle] +
                             Vec3(0.80 * r * std::cos(phi), 0.26 * r * std::sin(phi), 0.30 * z));
    model.group_of_vertex.push_back(0);
  }

  AddSegment(model, a[kNeckStart], a[kNeckEnd], 8);
  AddSegment(model, a[kSkull], a[kNose], 6);
  AddSegment(model, a[kTailStart], a[kTailEnd], 5);
  for (int leg = 0; leg < 4; ++leg) {
    AddSegment(model, a[kThighLF + leg], a[kKneeLF + leg], 5);
    AddSegment(model, a[kKneeLF + leg], a[kHoofLF + leg], 5);
  }
  return model;
}

}  // namespace

PoseLibrary MakeQuadrupedPoseLibrary(int count, std::uint64_t seed) {
  HERDSYNTH_ENFORCE(count >= 1, ErrorCode::kConfiguration, "pose library size must be >= 1");
  PoseLibrary library;
  library.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(MixSeed(seed, static_cast<std::uint64_t>(i)));
    PoseParams p;
    for (double& swing : p.leg_swing) swing = UniformReal(rng, -0.45, 0.45);
    for (double& bend : p.knee_bend) bend = UniformReal(rng, 0.0, 0.5);
    p.neck_pitch = UniformReal(rng, -1.0, 0.25);
    p.tail_lift = UniformReal(rng, 0.05, 0.5);
    p.tail_sway = UniformReal(rng, -0.4, 0.4);
    library.push_back(BuildModel(p));
  }
  return library;
}

}  // namespace herdsynth
