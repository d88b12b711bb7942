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

#include "herdsynth/geometry.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "herdsynth/error.h"

namespace herdsynth {

void CameraModel::ValidateIntrinsics(double fx, double fy, int width, int height) {
  HERDSYNTH_ENFORCE(std::isfinite(fx) && std::isfinite(fy) && fx > 0.0 && fy > 0.0,
                    ErrorCode::kInvalidArgument, "camera focal lengths must be positive");
  HERDSYNTH_ENFORCE(width > 0 && height > 0, ErrorCode::kInvalidArgument,
                    "camera image size must be positive");
}

CameraModel CameraModel::FromQuaternion(const Vec3& position, const Quat& world_to_camera,
                                        double fx, double fy, double cx, double cy, int width,
                                        int height) {
  ValidateIntrinsics(fx, fy, width, height);
  const double norm = world_to_camera.norm();
  HERDSYNTH_ENFORCE(std::isfinite(norm) && std::abs(norm - 1.0) <= 1e-6,
                    ErrorCode::kInvalidArgument, "camera quaternion is not unit length");
  CameraModel cam;
  cam.position_ = position;
  // Only renormalize when needed so a stored quaternion reloads bit-exact.
  cam.orientation_ = world_to_camera;
  if (std::abs(norm - 1.0) > 1e-12) cam.orientation_.normalize();
  cam.rotation_ = cam.orientation_.toRotationMatrix();
  cam.fx_ = fx;
  cam.fy_ = fy;
  cam.cx_ = cx;
  cam.cy_ = cy;
  cam.width_ = width;
  cam.height_ = height;
  return cam;
}

CameraModel CameraModel::FromMatrix(const Vec3& position, const Mat3& world_to_camera, double fx,
                                    double fy, double cx, double cy, int width, int height) {
  ValidateIntrinsics(fx, fy, width, height);
  const double ortho_err = (world_to_camera * world_to_camera.transpose() - Mat3::Identity())
                               .cwiseAbs()
                               .maxCoeff();
  HERDSYNTH_ENFORCE(ortho_err <= 1e-9 && std::abs(world_to_camera.determinant() - 1.0) <= 1e-9,
                    ErrorCode::kInvalidArgument,
                    "camera orientation is not a proper rotation matrix");
  CameraModel cam;
  cam.position_ = position;
  cam.orientation_ = Quat(world_to_camera).normalized();
  // Keep the caller's matrix so projections match it bit for bit.
  cam.rotation_ = world_to_camera;
  cam.fx_ = fx;
  cam.fy_ = fy;
  cam.cx_ = cx;
  cam.cy_ = cy;
  cam.width_ = width;
  cam.height_ = height;
  return cam;
}

bool CameraModel::operator==(const CameraModel& o) const {
  return position_ == o.position_ && rotation_ == o.rotation_ && fx_ == o.fx_ &&
         fy_ == o.fy_ && cx_ == o.cx_ && cy_ == o.cy_ && width_ == o.width_ &&
         height_ == o.height_;
}

Projection Project(const Vec3& point, const CameraModel& cam) {
  HERDSYNTH_ENFORCE(point.allFinite(), ErrorCode::kInvalidArgument, "point is not finite");
  const Vec3 p = cam.ToCameraFrame(point);
  if (p.z() <= kBehindCameraEpsilon) {
    throw Error(ErrorCode::kBehindCamera, "point lies at or behind the camera plane");
  }
  return {cam.fx() * p.x() / p.z() + cam.cx(), cam.fy() * p.y() / p.z() + cam.cy(), p.z()};
}

Vec3 Unproject(double u, double v, double depth, const CameraModel& cam) {
  const Vec3 p((u - cam.cx()) * depth / cam.fx(), (v - cam.cy()) * depth / cam.fy(), depth);
  return cam.ToWorldFrame(p);
}

double Iou(const PixelBox& a, const PixelBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

InstanceMask::InstanceMask(int width, int height)
    : width_(width),
      height_(height),
      ids_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), 0) {
  HERDSYNTH_ENFORCE(width >= 0 && height >= 0, ErrorCode::kInvalidArgument,
                    "mask dimensions must be non-negative");
}

InstanceMask::InstanceMask(int width, int height, std::vector<InstanceId> ids)
    : width_(width), height_(height), ids_(std::move(ids)) {
  HERDSYNTH_ENFORCE(width >= 0 && height >= 0 &&
                        ids_.size() == static_cast<std::size_t>(width) * height,
                    ErrorCode::kInvalidArgument, "mask id grid does not match its dimensions");
}

std::size_t InstanceMask::PixelCount(InstanceId id) const {
  return static_cast<std::size_t>(std::count(ids_.begin(), ids_.end(), id));
}

std::vector<InstanceId> InstanceMask::Instances() const {
  std::set<InstanceId> seen;
  for (InstanceId id : ids_) {
    if (id != 0) seen.insert(id);
  }
  return {seen.begin(), seen.end()};
}

PixelBox MaskToBox(const InstanceMask& mask, InstanceId id) {
  int x0 = std::numeric_limits<int>::max();
  int y0 = std::numeric_limits<int>::max();
  int x1 = -1;
  int y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y) != id) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) {
    throw Error(ErrorCode::kMissingInstance,
                "instance " + std::to_string(id) + " does not appear in the mask");
  }
  return {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x1 - x0 + 1),
          static_cast<double>(y1 - y0 + 1)};
}

Mat3 LookAtRotation(const Vec3& eye, const Vec3& target) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(Vec3::UnitZ());
  if (right.norm() < 1e-9) right = forward.cross(Vec3::UnitX());
  right.normalize();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  return r;
}

}  // namespace herdsynth
