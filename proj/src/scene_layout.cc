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

#include "herdsynth/scene_layout.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "herdsynth/error.h"
#include "herdsynth/rng.h"

namespace herdsynth {

using nlohmann::json;

Vec3 SceneInstance::ToWorld(const Vec3& model_point) const {
  const double c = std::cos(placement.yaw);
  const double s = std::sin(placement.yaw);
  const Vec3 p = scale * model_point;
  return Vec3(c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z()) + placement.translation;
}

std::vector<Vec3> SceneInstance::WorldVertices() const {
  std::vector<Vec3> out;
  out.reserve(base_vertices.size());
  for (const Vec3& v : base_vertices) out.push_back(ToWorld(v));
  return out;
}

Vec3 SceneInstance::Centroid() const {
  Vec3 sum = Vec3::Zero();
  for (const Vec3& v : base_vertices) sum += ToWorld(v);
  return base_vertices.empty() ? placement.translation
                               : Vec3(sum / static_cast<double>(base_vertices.size()));
}

PixelBox OccupancyBox(const SceneInstance& instance) {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = x0;
  double x1 = -x0;
  double y1 = -x0;
  for (const Vec3& v : instance.base_vertices) {
    const Vec3 w = instance.ToWorld(v);
    x0 = std::min(x0, w.x());
    y0 = std::min(y0, w.y());
    x1 = std::max(x1, w.x());
    y1 = std::max(y1, w.y());
  }
  if (instance.base_vertices.empty()) {
    return {instance.placement.translation.x(), instance.placement.translation.y(), 0.0, 0.0};
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

std::vector<SceneInstance> PlaceInstances(const PoseLibrary& library, int n, const Aabb& bounds,
                                          std::pair<double, double> scale_range,
                                          std::uint64_t seed) {
  HERDSYNTH_ENFORCE(!library.empty(), ErrorCode::kConfiguration, "pose library is empty");
  HERDSYNTH_ENFORCE(n >= 1 && n <= std::numeric_limits<InstanceId>::max(),
                    ErrorCode::kConfiguration, "instance count must be in [1, 65535]");
  HERDSYNTH_ENFORCE(scale_range.first > 0.0 && scale_range.first <= scale_range.second,
                    ErrorCode::kConfiguration, "scale range must satisfy 0 < lo <= hi");
  HERDSYNTH_ENFORCE(bounds.min.x() <= bounds.max.x() && bounds.min.y() <= bounds.max.y(),
                    ErrorCode::kConfiguration, "bounds min must not exceed max");
  for (const PosedModel& m : library) {
    HERDSYNTH_ENFORCE(m.vertices.size() == m.group_of_vertex.size() && !m.vertices.empty(),
                      ErrorCode::kConfiguration, "posed model has mismatched group labels");
  }

  Rng rng(seed);
  std::vector<SceneInstance> accepted;
  std::vector<PixelBox> boxes;
  for (int attempt = 0; attempt < n; ++attempt) {
    const double scale = UniformReal(rng, scale_range.first, scale_range.second);
    const auto pose =
        static_cast<int>(UniformInt(rng, 0, static_cast<std::int64_t>(library.size()) - 1));
    const double yaw = UniformReal(rng, 0.0, 2.0 * std::numbers::pi);
    const double x = UniformReal(rng, bounds.min.x(), bounds.max.x());
    const double y = UniformReal(rng, bounds.min.y(), bounds.max.y());

    SceneInstance inst;
    inst.id = static_cast<InstanceId>(attempt + 1);
    inst.base_vertices = library[static_cast<std::size_t>(pose)].vertices;
    inst.group_of_vertex = library[static_cast<std::size_t>(pose)].group_of_vertex;
    inst.scale = scale;
    inst.pose_index = pose;
    inst.placement = {yaw, Vec3(x, y, bounds.min.z())};

    const PixelBox box = OccupancyBox(inst);
    const bool collides = std::any_of(boxes.begin(), boxes.end(),
                                      [&](const PixelBox& b) { return Iou(box, b) > 0.0; });
    if (collides) continue;
    boxes.push_back(box);
    accepted.push_back(std::move(inst));
  }
  return accepted;
}

Vec3 HerdCentroid(const std::vector<SceneInstance>& instances) {
  HERDSYNTH_ENFORCE(!instances.empty(), ErrorCode::kEmptyScene, "scene has no instances");
  Vec3 sum = Vec3::Zero();
  for (const SceneInstance& inst : instances) sum += inst.Centroid();
  return sum / static_cast<double>(instances.size());
}

std::vector<CameraModel> PlaceCameras(const std::vector<SceneInstance>& instances, int k,
                                      std::pair<double, double> distance_range,
                                      std::uint64_t seed, const CameraRig& rig) {
  HERDSYNTH_ENFORCE(!instances.empty(), ErrorCode::kEmptyScene,
                    "cannot place cameras around an empty scene");
  HERDSYNTH_ENFORCE(k >= 1, ErrorCode::kConfiguration, "camera count must be >= 1");
  HERDSYNTH_ENFORCE(distance_range.first > 0.0 && distance_range.first <= distance_range.second,
                    ErrorCode::kConfiguration, "distance range must satisfy 0 < lo <= hi");
  HERDSYNTH_ENFORCE(rig.min_elevation_deg <= rig.max_elevation_deg &&
                        rig.min_elevation_deg >= -90.0 && rig.max_elevation_deg <= 90.0,
                    ErrorCode::kConfiguration, "elevation range must lie in [-90, 90]");
  HERDSYNTH_ENFORCE(rig.hfov_deg > 0.0 && rig.hfov_deg < 180.0, ErrorCode::kConfiguration,
                    "horizontal field of view must lie in (0, 180)");

  const Vec3 target = HerdCentroid(instances);
  const double deg = std::numbers::pi / 180.0;
  const double fx = 0.5 * rig.width / std::tan(0.5 * rig.hfov_deg * deg);

  Rng rng(seed);
  std::vector<CameraModel> cameras;
  for (int i = 0; i < k; ++i) {
    const double azimuth = UniformReal(rng, 0.0, 2.0 * std::numbers::pi);
    // Area-uniform on the spherical cap between the two elevations.
    const double sin_el = UniformReal(rng, std::sin(rig.min_elevation_deg * deg),
                                      std::sin(rig.max_elevation_deg * deg));
    const double dist = UniformReal(rng, distance_range.first, distance_range.second);
    const double cos_el = std::sqrt(std::max(0.0, 1.0 - sin_el * sin_el));
    const Vec3 dir(cos_el * std::cos(azimuth), cos_el * std::sin(azimuth), sin_el);
    const Vec3 eye = target + dist * dir;
    const Quat q = Quat(LookAtRotation(eye, target)).normalized();
    cameras.push_back(CameraModel::FromQuaternion(eye, q, fx, fx, 0.5 * rig.width,
                                                  0.5 * rig.height, rig.width, rig.height));
  }
  return cameras;
}

const SceneInstance* SceneSpec::FindInstance(InstanceId id) const {
  for (const SceneInstance& inst : instances) {
    if (inst.id == id) return &inst;
  }
  return nullptr;
}

SceneSpec GenerateScene(const SceneConfig& config) {
  SceneSpec scene;
  scene.config = config;
  scene.attempted = config.num_instances;
  const PoseLibrary library = MakeQuadrupedPoseLibrary(config.pose_library_size,
                                                       MixSeed(config.seed, 0));
  scene.instances = PlaceInstances(library, config.num_instances, config.bounds,
                                   config.scale_range, MixSeed(config.seed, 1));
  scene.cameras = PlaceCameras(scene.instances, config.num_cameras, config.distance_range,
                               MixSeed(config.seed, 2), config.rig);
  return scene;
}

// --- scene file ---------------------------------------------------------

namespace {

json Vec3ToJson(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 Vec3FromJson(const json& j) {
  HERDSYNTH_ENFORCE(j.is_array() && j.size() == 3, ErrorCode::kParse,
                    "expected a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json CameraToJson(const CameraModel& cam) {
  const Quat& q = cam.orientation();
  return json{{"position", Vec3ToJson(cam.position())},
              {"quaternion", json::array({q.w(), q.x(), q.y(), q.z()})},
              {"fx", cam.fx()},
              {"fy", cam.fy()},
              {"cx", cam.cx()},
              {"cy", cam.cy()},
              {"width", cam.width()},
              {"height", cam.height()}};
}

CameraModel CameraFromJson(const json& j) {
  const Vec3 pos = Vec3FromJson(j.at("position"));
  const double fx = j.at("fx").get<double>();
  const double fy = j.at("fy").get<double>();
  const double cx = j.at("cx").get<double>();
  const double cy = j.at("cy").get<double>();
  const int w = j.at("width").get<int>();
  const int h = j.at("height").get<int>();
  if (j.contains("rotation")) {
    const json& r = j.at("rotation");
    HERDSYNTH_ENFORCE(r.is_array() && r.size() == 3, ErrorCode::kParse,
                      "rotation must be a 3x3 row-major array");
    Mat3 m;
    for (int row = 0; row < 3; ++row) m.row(row) = Vec3FromJson(r[row]).transpose();
    return CameraModel::FromMatrix(pos, m, fx, fy, cx, cy, w, h);
  }
  const json& q = j.at("quaternion");
  HERDSYNTH_ENFORCE(q.is_array() && q.size() == 4, ErrorCode::kParse,
                    "quaternion must be [w, x, y, z]");
  return CameraModel::FromQuaternion(pos,
                                     Quat(q[0].get<double>(), q[1].get<double>(),
                                          q[2].get<double>(), q[3].get<double>()),
                                     fx, fy, cx, cy, w, h);
}

json ConfigToJson(const SceneConfig& c) {
  return json{{"num_instances", c.num_instances},
              {"num_cameras", c.num_cameras},
              {"pose_library_size", c.pose_library_size},
              {"bounds", {{"min", Vec3ToJson(c.bounds.min)}, {"max", Vec3ToJson(c.bounds.max)}}},
              {"scale_range", {c.scale_range.first, c.scale_range.second}},
              {"distance_range", {c.distance_range.first, c.distance_range.second}},
              {"rig",
               {{"width", c.rig.width},
                {"height", c.rig.height},
                {"hfov_deg", c.rig.hfov_deg},
                {"min_elevation_deg", c.rig.min_elevation_deg},
                {"max_elevation_deg", c.rig.max_elevation_deg}}},
              {"seed", c.seed}};
}

SceneConfig ConfigFromJson(const json& j) {
  SceneConfig c;
  c.num_instances = j.at("num_instances").get<int>();
  c.num_cameras = j.at("num_cameras").get<int>();
  c.pose_library_size = j.at("pose_library_size").get<int>();
  c.bounds.min = Vec3FromJson(j.at("bounds").at("min"));
  c.bounds.max = Vec3FromJson(j.at("bounds").at("max"));
  c.scale_range = {j.at("scale_range")[0].get<double>(), j.at("scale_range")[1].get<double>()};
  c.distance_range = {j.at("distance_range")[0].get<double>(),
                      j.at("distance_range")[1].get<double>()};
  const json& rig = j.at("rig");
  c.rig.width = rig.at("width").get<int>();
  c.rig.height = rig.at("height").get<int>();
  c.rig.hfov_deg = rig.at("hfov_deg").get<double>();
  c.rig.min_elevation_deg = rig.at("min_elevation_deg").get<double>();
  c.rig.max_elevation_deg = rig.at("max_elevation_deg").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

std::string SceneToJson(const SceneSpec& scene) {
  json instances = json::array();
  for (const SceneInstance& inst : scene.instances) {
    json verts = json::array();
    for (const Vec3& v : inst.base_vertices) verts.push_back(Vec3ToJson(v));
    instances.push_back({{"id", inst.id},
                         {"scale", inst.scale},
                         {"pose_index", inst.pose_index},
                         {"placement",
                          {{"yaw", inst.placement.yaw},
                           {"translation", Vec3ToJson(inst.placement.translation)}}},
                         {"vertices", std::move(verts)},
                         {"groups", inst.group_of_vertex}});
  }
  json cameras = json::array();
  for (const CameraModel& cam : scene.cameras) cameras.push_back(CameraToJson(cam));
  json doc{{"format", "herdsynth.scene/1"},
           {"config", ConfigToJson(scene.config)},
           {"attempted", scene.attempted},
           {"instances", std::move(instances)},
           {"cameras", std::move(cameras)}};
  return doc.dump(1) + "\n";
}

SceneSpec SceneFromJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("scene file: ") + e.what());
  }
  try {
    SceneSpec scene;
    scene.config = ConfigFromJson(doc.at("config"));
    scene.attempted = doc.at("attempted").get<int>();
    for (const json& ji : doc.at("instances")) {
      SceneInstance inst;
      inst.id = ji.at("id").get<InstanceId>();
      inst.scale = ji.at("scale").get<double>();
      inst.pose_index = ji.at("pose_index").get<int>();
      inst.placement.yaw = ji.at("placement").at("yaw").get<double>();
      inst.placement.translation = Vec3FromJson(ji.at("placement").at("translation"));
      for (const json& v : ji.at("vertices")) inst.base_vertices.push_back(Vec3FromJson(v));
      inst.group_of_vertex = ji.at("groups").get<std::vector<std::uint8_t>>();
      HERDSYNTH_ENFORCE(inst.group_of_vertex.size() == inst.base_vertices.size(),
                        ErrorCode::kParse, "instance group labels do not match its vertices");
      HERDSYNTH_ENFORCE(inst.scale > 0.0, ErrorCode::kParse, "instance scale must be positive");
      scene.instances.push_back(std::move(inst));
    }
    for (const json& jc : doc.at("cameras")) scene.cameras.push_back(CameraFromJson(jc));
    return scene;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("scene file: ") + e.what());
  }
}

void SaveScene(const SceneSpec& scene, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  HERDSYNTH_ENFORCE(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  out << SceneToJson(scene);
  HERDSYNTH_ENFORCE(out.good(), ErrorCode::kIo, "failed writing " + path.string());
}

SceneSpec LoadScene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  HERDSYNTH_ENFORCE(in.good(), ErrorCode::kIo, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return SceneFromJson(ss.str());
}

}  // namespace herdsynth
