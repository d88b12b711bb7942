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

#include "herdsynth/mock_render.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "herdsynth/error.h"
#include "herdsynth/keypoints.h"

namespace herdsynth {
namespace {

constexpr double kMinHitDistance = 1e-9;

Ellipsoid Sphere(const Vec3& center, double radius) {
  return {center, Mat3::Identity(), Vec3::Constant(radius)};
}

// Prolate ellipsoid spanning the segment [a, b] with the given thickness.
Ellipsoid Segment(const Vec3& a, const Vec3& b, double thickness) {
  const Vec3 d = b - a;
  const double half = 0.5 * d.norm();
  Vec3 major = half > 0.0 ? Vec3(d / (2.0 * half)) : Vec3::UnitX();
  Vec3 side = major.cross(Vec3::UnitZ());
  if (side.norm() < 1e-9) side = major.cross(Vec3::UnitX());
  side.normalize();
  const Vec3 third = major.cross(side);
  Ellipsoid e;
  e.center = 0.5 * (a + b);
  e.axes.col(0) = major;
  e.axes.col(1) = side;
  e.axes.col(2) = third;
  e.radii = Vec3(half + 0.5 * thickness, thickness, thickness);
  return e;
}

// Ellipsoid prepared in a camera frame for the per-pixel ray test.
struct CameraEllipsoid {
  Vec3 center;     // camera frame
  Mat3 quadric;    // (p - c)^T Q (p - c) = 1
  double center_term;  // c^T Q c - 1
  Vec3 qc;             // Q c
  double bound_radius;
};

CameraEllipsoid Prepare(const Ellipsoid& e, const CameraModel& cam) {
  const Mat3 inv_r2 = e.radii.cwiseAbs2().cwiseInverse().asDiagonal();
  const Mat3 world_q = e.axes * inv_r2 * e.axes.transpose();
  CameraEllipsoid out;
  out.center = cam.ToCameraFrame(e.center);
  out.quadric = cam.rotation() * world_q * cam.rotation().transpose();
  out.qc = out.quadric * out.center;
  out.center_term = out.center.dot(out.qc) - 1.0;
  out.bound_radius = e.BoundingRadius();
  return out;
}

// Ray from the camera center along `dir` (camera frame, dir.z == 1), so the
// ray parameter equals the camera-frame depth.
std::optional<double> HitDepth(const CameraEllipsoid& e, const Vec3& dir) {
  const double a = dir.dot(e.quadric * dir);
  const double b = dir.dot(e.qc);
  const double disc = b * b - a * e.center_term;
  if (disc < 0.0 || a <= 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t0 = (b - sq) / a;
  if (t0 > kMinHitDistance) return t0;
  const double t1 = (b + sq) / a;
  if (t1 > kMinHitDistance) return t1;
  return std::nullopt;
}

struct PixelRange {
  int x0, y0, x1, y1;  // inclusive-exclusive
};

// Conservative screen rectangle of the bounding sphere. x/z and y/z are
// monotone in each coordinate over the sphere's bounding cube when z > 0, so
// the cube corners bound the projection.
PixelRange ScreenBounds(const CameraEllipsoid& e, const CameraModel& cam) {
  const Vec3& c = e.center;
  const double r = e.bound_radius;
  if (c.z() - r <= kMinHitDistance) return {0, 0, cam.width(), cam.height()};
  double u_lo = std::numeric_limits<double>::infinity();
  double u_hi = -u_lo;
  double v_lo = u_lo;
  double v_hi = -u_lo;
  for (double z : {c.z() - r, c.z() + r}) {
    for (double dx : {-r, r}) {
      const double u = cam.fx() * (c.x() + dx) / z + cam.cx();
      u_lo = std::min(u_lo, u);
      u_hi = std::max(u_hi, u);
    }
    for (double dy : {-r, r}) {
      const double v = cam.fy() * (c.y() + dy) / z + cam.cy();
      v_lo = std::min(v_lo, v);
      v_hi = std::max(v_hi, v);
    }
  }
  auto clamp_lo = [](double v, int hi) {
    return static_cast<int>(std::clamp(std::floor(v - 0.5), 0.0, static_cast<double>(hi)));
  };
  auto clamp_hi = [](double v, int hi) {
    return static_cast<int>(std::clamp(std::ceil(v + 0.5), 0.0, static_cast<double>(hi)));
  };
  return {clamp_lo(u_lo, cam.width()), clamp_lo(v_lo, cam.height()),
          clamp_hi(u_hi, cam.width()), clamp_hi(v_hi, cam.height())};
}

}  // namespace

InstancePrimitives FitBodyPrimitives(const SceneInstance& instance) {
  std::array<Vec3, kNumZebraKeypoints> kp;
  for (int slot = 0; slot < kNumZebraKeypoints; ++slot) kp[slot] = GroupCentroid(instance, slot + 1);
  const double s = instance.scale;

  InstancePrimitives out;
  out.id = instance.id;
  auto& e = out.ellipsoids;

  // Barrel along the spine.
  {
    const Vec3 spine = kp[kBackFront] - kp[kBackEnd];
    Ellipsoid body = Segment(kp[kBackEnd], kp[kBackFront], 0.30 * s);
    body.center = kp[kBodyMiddle] + 0.5 * (0.5 * (kp[kBackFront] + kp[kBackEnd]) - kp[kBodyMiddle]);
    body.radii = Vec3(0.5 * spine.norm() + 0.25 * s, 0.26 * s, 0.30 * s);
    e.push_back(body);
  }
  e.push_back(Segment(kp[kNeckStart], kp[kNeckEnd], 0.13 * s));
  e.push_back(Segment(kp[kSkull], kp[kNose], 0.09 * s));
  e.push_back(Segment(kp[kTailStart], kp[kTailEnd], 0.035 * s));
  for (int leg = 0; leg < 4; ++leg) {
    e.push_back(Segment(kp[kThighLF + leg], kp[kKneeLF + leg], 0.08 * s));
    e.push_back(Segment(kp[kKneeLF + leg], kp[kHoofLF + leg], 0.06 * s));
  }
  for (int slot = 0; slot < kNumZebraKeypoints; ++slot) {
    const bool small = slot >= kLeftEye && slot <= kRightEarBase;
    e.push_back(Sphere(kp[slot], (small ? 0.05 : 0.07) * s));
  }
  return out;
}

std::vector<InstancePrimitives> FitScenePrimitives(const SceneSpec& scene) {
  std::vector<InstancePrimitives> out;
  out.reserve(scene.instances.size());
  for (const SceneInstance& inst : scene.instances) out.push_back(FitBodyPrimitives(inst));
  return out;
}

RenderedFrame Rasterize(const SceneSpec& scene, const CameraModel& cam,
                        const std::vector<InstancePrimitives>& primitives,
                        std::int64_t image_id) {
  RenderedFrame frame;
  frame.image_id = image_id;
  frame.width = cam.width();
  frame.height = cam.height();
  frame.mask = InstanceMask(cam.width(), cam.height());
  frame.depth.assign(static_cast<std::size_t>(cam.width()) * cam.height(),
                     std::numeric_limits<float>::infinity());
  std::vector<double> zbuf(frame.depth.size(), std::numeric_limits<double>::infinity());

  for (const InstancePrimitives& inst : primitives) {
    HERDSYNTH_ENFORCE(inst.id != 0, ErrorCode::kConsistency, "instance id 0 is reserved");
    HERDSYNTH_ENFORCE(scene.instances.empty() || scene.FindInstance(inst.id) != nullptr,
                      ErrorCode::kConsistency,
                      "primitives reference unknown instance " + std::to_string(inst.id));
    for (const Ellipsoid& ellipsoid : inst.ellipsoids) {
      const CameraEllipsoid ce = Prepare(ellipsoid, cam);
      if (ce.center.z() + ce.bound_radius <= kMinHitDistance) continue;
      const PixelRange range = ScreenBounds(ce, cam);
      for (int y = range.y0; y < range.y1; ++y) {
        const double dy = (y + 0.5 - cam.cy()) / cam.fy();
        for (int x = range.x0; x < range.x1; ++x) {
          const Vec3 dir((x + 0.5 - cam.cx()) / cam.fx(), dy, 1.0);
          const std::optional<double> t = HitDepth(ce, dir);
          if (!t) continue;
          const std::size_t idx = static_cast<std::size_t>(y) * cam.width() + x;
          // Strict comparison: ties keep the earlier instance.
          if (*t < zbuf[idx]) {
            zbuf[idx] = *t;
            frame.mask.set(x, y, inst.id);
          }
        }
      }
    }
  }
  for (std::size_t i = 0; i < zbuf.size(); ++i) frame.depth[i] = static_cast<float>(zbuf[i]);
  return frame;
}

RenderedFrame Rasterize(const SceneSpec& scene, const CameraModel& cam, std::int64_t image_id) {
  return Rasterize(scene, cam, FitScenePrimitives(scene), image_id);
}

Image ShadeFrame(const RenderedFrame& frame) {
  Image img{frame.width, frame.height, 1, {}};
  img.data.assign(static_cast<std::size_t>(frame.width) * frame.height, 96);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      const InstanceId id = frame.mask.at(x, y);
      if (id == 0) continue;
      const double base = 140.0 + static_cast<double>((id * 53) % 100);
      const double fade = 1.0 / (1.0 + 0.01 * frame.DepthAt(x, y));
      img.data[static_cast<std::size_t>(y) * frame.width + x] =
          static_cast<std::uint8_t>(std::clamp(base * fade, 0.0, 255.0));
    }
  }
  return img;
}

}  // namespace herdsynth
