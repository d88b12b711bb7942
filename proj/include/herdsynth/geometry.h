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

// Camera model, pinhole projection, pixel boxes and instance masks.
//
// Pixel convention: integer pixel (i, j) covers [i, i+1) x [j, j+1). A box
// produced from a mask is inclusive of every member pixel, so a single pixel
// at (7, 7) yields {x=7, y=7, w=1, h=1}.

#ifndef HERDSYNTH_GEOMETRY_H_
#define HERDSYNTH_GEOMETRY_H_

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace herdsynth {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

using InstanceId = std::uint16_t;

inline constexpr double kBehindCameraEpsilon = 1e-9;

struct PixelBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double max_dim() const { return w > h ? w : h; }

  bool operator==(const PixelBox&) const = default;
};

// Pinhole camera with a world pose. The stored rotation maps world-frame
// vectors into the camera frame (x right, y down, z forward).
class CameraModel {
 public:
  CameraModel() = default;

  // The quaternion must be within 1e-6 of unit norm; it is renormalized.
  static CameraModel FromQuaternion(const Vec3& position, const Quat& world_to_camera,
                                    double fx, double fy, double cx, double cy, int width,
                                    int height);

  // The matrix must be orthonormal with determinant +1 within 1e-9.
  static CameraModel FromMatrix(const Vec3& position, const Mat3& world_to_camera, double fx,
                                double fy, double cx, double cy, int width, int height);

  const Vec3& position() const { return position_; }
  const Quat& orientation() const { return orientation_; }
  const Mat3& rotation() const { return rotation_; }
  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }
  int width() const { return width_; }
  int height() const { return height_; }

  Vec3 ToCameraFrame(const Vec3& world) const { return rotation_ * (world - position_); }
  Vec3 ToWorldFrame(const Vec3& camera) const {
    return rotation_.transpose() * camera + position_;
  }
  // Optical axis direction in the world frame.
  Vec3 Forward() const { return rotation_.row(2).transpose(); }

  bool operator==(const CameraModel& o) const;

 private:
  static void ValidateIntrinsics(double fx, double fy, int width, int height);

  Vec3 position_ = Vec3::Zero();
  Quat orientation_ = Quat::Identity();
  Mat3 rotation_ = Mat3::Identity();
  double fx_ = 1.0;
  double fy_ = 1.0;
  double cx_ = 0.0;
  double cy_ = 0.0;
  int width_ = 1;
  int height_ = 1;
};

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

// Projects a world point. (u, v) may fall outside the image; throws
// kBehindCamera when the camera-frame depth is <= 1e-9 m.
Projection Project(const Vec3& point, const CameraModel& cam);

// Inverse of Project for a known camera-frame depth.
Vec3 Unproject(double u, double v, double depth, const CameraModel& cam);

double Iou(const PixelBox& a, const PixelBox& b);

// Per-pixel instance identifiers, row-major, 0 = background.
class InstanceMask {
 public:
  InstanceMask() = default;
  InstanceMask(int width, int height);
  InstanceMask(int width, int height, std::vector<InstanceId> ids);

  int width() const { return width_; }
  int height() const { return height_; }
  bool Contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  InstanceId at(int x, int y) const { return ids_[Index(x, y)]; }
  void set(int x, int y, InstanceId id) { ids_[Index(x, y)] = id; }

  const std::vector<InstanceId>& ids() const { return ids_; }
  std::vector<InstanceId>& mutable_ids() { return ids_; }

  std::size_t PixelCount(InstanceId id) const;
  // Distinct nonzero ids in ascending order.
  std::vector<InstanceId> Instances() const;

  bool operator==(const InstanceMask&) const = default;

 private:
  std::size_t Index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<InstanceId> ids_;
};

// Tightest box around all pixels carrying `id`. Throws kMissingInstance.
PixelBox MaskToBox(const InstanceMask& mask, InstanceId id);

// Row-major look-at rotation (world -> camera) for a camera at `eye` looking
// at `target`, with world z up. Falls back to world x as the up hint when the
// view direction is vertical.
Mat3 LookAtRotation(const Vec3& eye, const Vec3& target);

}  // namespace herdsynth

#endif  // HERDSYNTH_GEOMETRY_H_
