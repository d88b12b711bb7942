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

#include <cmath>

#include <gtest/gtest.h>

#include "herdsynth/error.h"
#include "herdsynth/keypoints.h"
#include "herdsynth/mock_render.h"
#include "test_util.h"

namespace herdsynth {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

SceneInstance GroupedInstance(const std::vector<Vec3>& verts, int group) {
  SceneInstance inst;
  inst.id = 1;
  inst.base_vertices = verts;
  inst.group_of_vertex.assign(verts.size(), static_cast<std::uint8_t>(group));
  return inst;
}

// One generated instance seen alone from straight above-ish at 1080p.
struct SoloFixture {
  SceneSpec scene;
  CameraModel cam;
  RenderedFrame frame;
};

SoloFixture MakeSolo(std::uint64_t seed) {
  SceneConfig cfg;
  cfg.seed = seed;
  cfg.num_instances = 1;
  cfg.num_cameras = 1;
  cfg.pose_library_size = 4;
  cfg.distance_range = {18.0, 22.0};
  cfg.rig.min_elevation_deg = 40.0;
  SoloFixture f;
  f.scene = GenerateScene(cfg);
  f.cam = f.scene.cameras[0];
  f.frame = Rasterize(f.scene, f.cam, 1);
  return f;
}

TEST(GroupCentroidTest, Examples) {
  EXPECT_EQ(GroupCentroid(GroupedInstance({Vec3(1, 2, 3)}, 5), 5), Vec3(1, 2, 3));
  EXPECT_EQ(GroupCentroid(GroupedInstance({Vec3(0, 0, 0), Vec3(2, 0, 0)}, 1), 1), Vec3(1, 0, 0));
  EXPECT_EQ(CodeOf([] { GroupCentroid(GroupedInstance({Vec3::Zero()}, 1), 2); }),
            ErrorCode::kSchema);
  EXPECT_EQ(CodeOf([] { GroupCentroid(GroupedInstance({Vec3::Zero()}, 1), 28); }),
            ErrorCode::kSchema);
}

TEST(GroupCentroidTest, MatchesSummationOracle) {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    SceneInstance inst;
    inst.id = 1;
    inst.scale = UniformReal(rng, 0.5, 2.0);
    inst.placement.yaw = UniformReal(rng, -M_PI, M_PI);
    inst.placement.translation = Vec3(UniformReal(rng, -50, 50), UniformReal(rng, -50, 50), 0);
    for (int i = 0; i < 100; ++i) {
      inst.base_vertices.emplace_back(UniformReal(rng, -1, 1), UniformReal(rng, -1, 1),
                                      UniformReal(rng, 0, 2));
      inst.group_of_vertex.push_back(static_cast<std::uint8_t>(UniformInt(rng, 0, 3)));
    }
    const double c = std::cos(inst.placement.yaw);
    const double s = std::sin(inst.placement.yaw);
    for (int g = 1; g <= 3; ++g) {
      double sx = 0, sy = 0, sz = 0;
      int n = 0;
      for (std::size_t i = 0; i < inst.base_vertices.size(); ++i) {
        if (inst.group_of_vertex[i] != g) continue;
        const Vec3& v = inst.base_vertices[i];
        sx += inst.scale * (c * v.x() - s * v.y()) + inst.placement.translation.x();
        sy += inst.scale * (s * v.x() + c * v.y()) + inst.placement.translation.y();
        sz += inst.scale * v.z() + inst.placement.translation.z();
        ++n;
      }
      if (n == 0) continue;
      const Vec3 got = GroupCentroid(inst, g);
      EXPECT_NEAR(got.x(), sx / n, 1e-12 * (1 + std::abs(sx / n)));
      EXPECT_NEAR(got.y(), sy / n, 1e-12 * (1 + std::abs(sy / n)));
      EXPECT_NEAR(got.z(), sz / n, 1e-12 * (1 + std::abs(sz / n)));
    }
  }
}

TEST(VisibilityTest, RuleTable) {
  InstanceMask mask(10, 10);
  mask.set(3, 4, 7);
  mask.set(5, 5, 8);
  EXPECT_EQ(ClassifyVisibility(3.2, 4.9, mask, 7), 2);
  EXPECT_EQ(ClassifyVisibility(3.0, 4.0, mask, 7), 2);
  EXPECT_EQ(ClassifyVisibility(2.999, 4.0, mask, 7), 1);
  EXPECT_EQ(ClassifyVisibility(5.5, 5.5, mask, 7), 1);
  EXPECT_EQ(ClassifyVisibility(0.5, 0.5, mask, 7), 1);
  EXPECT_EQ(ClassifyVisibility(-0.5, 4.5, mask, 7), 1);
  EXPECT_EQ(ClassifyVisibility(10.0, 4.5, mask, 7), 1);
  EXPECT_EQ(ClassifyVisibility(3.5, 1e9, mask, 7), 1);
}

// Paints axis-aligned rectangles of two real scene instances into a mask.
RenderedFrame PaintedFrame(const SceneSpec& scene, const CameraModel& cam,
                           const std::vector<std::pair<InstanceId, PixelBox>>& rects) {
  RenderedFrame f;
  f.width = cam.width();
  f.height = cam.height();
  f.mask = InstanceMask(f.width, f.height);
  for (const auto& [id, r] : rects) {
    for (int y = static_cast<int>(r.y); y < r.bottom(); ++y) {
      for (int x = static_cast<int>(r.x); x < r.right(); ++x) f.mask.set(x, y, id);
    }
  }
  (void)scene;
  return f;
}

TEST(AnnotateFrameTest, MaxDimensionFilterBoundary) {
  const SceneSpec scene = GenerateScene(testing::SmallSceneConfig(3, 200, 150));
  ASSERT_GE(scene.instances.size(), 4u);
  const InstanceId a = scene.instances[0].id;
  const InstanceId b = scene.instances[1].id;
  const InstanceId c = scene.instances[2].id;
  const InstanceId d = scene.instances[3].id;
  const RenderedFrame f = PaintedFrame(scene, scene.cameras[0],
                                       {{a, {10, 10, 25, 28}},
                                        {b, {60, 10, 25, 31}},
                                        {c, {110, 10, 30, 30}},
                                        {d, {10, 80, 31, 2}}});
  const auto recs = AnnotateFrame(scene, scene.cameras[0], f);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].instance_id, std::min(b, d));
  EXPECT_EQ(recs[1].instance_id, std::max(b, d));
  for (const AnnotationRecord& r : recs) {
    EXPECT_EQ(r.keypoints.size(), 27u);
    EXPECT_EQ(r.schema, SchemaTag::kZebra27);
    EXPECT_EQ(r.area, r.bbox.area());
    EXPECT_EQ(r.segmentation.mask_id, r.instance_id);
  }
}

TEST(AnnotateFrameTest, FilterMonotoneInMinDim) {
  const SceneSpec scene = GenerateScene(testing::SmallSceneConfig(6, 320, 240));
  const RenderedFrame f = Rasterize(scene, scene.cameras[0]);
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  for (double min_dim = 0; min_dim <= 120; min_dim += 3) {
    const std::size_t n = AnnotateFrame(scene, scene.cameras[0], f, min_dim).size();
    EXPECT_LE(n, prev);
    prev = n;
  }
}

TEST(AnnotateFrameTest, UnoccludedInstanceIsFullyVisible) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const SoloFixture s = MakeSolo(seed);
    const auto recs = AnnotateFrame(s.scene, s.cam, s.frame);
    ASSERT_EQ(recs.size(), 1u);
    const SceneInstance& inst = s.scene.instances[0];
    for (int k = 0; k < 27; ++k) {
      const Vec3 pc = s.cam.ToCameraFrame(GroupCentroid(inst, k + 1));
      const double u = s.cam.fx() * pc.x() / pc.z() + s.cam.cx();
      const double v = s.cam.fy() * pc.y() / pc.z() + s.cam.cy();
      const Keypoint& kp = recs[0].keypoints[k];
      EXPECT_NEAR(kp.u, u, 1e-9);
      EXPECT_NEAR(kp.v, v, 1e-9);
      EXPECT_EQ(s.frame.mask.at(static_cast<int>(std::floor(u)), static_cast<int>(std::floor(v))),
                inst.id);
      EXPECT_EQ(kp.visibility, 2) << "slot " << k;
    }
  }
}

TEST(AnnotateFrameTest, VisibleKeypointsInsideBoxAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const SceneSpec scene = GenerateScene(testing::SmallSceneConfig(seed, 320, 240));
    for (const CameraModel& cam : scene.cameras) {
      const RenderedFrame f = Rasterize(scene, cam);
      const auto recs = AnnotateFrame(scene, cam, f);
      EXPECT_EQ(recs, AnnotateFrame(scene, cam, f));
      for (const AnnotationRecord& r : recs) {
        ValidateRecord(r, cam.width(), cam.height());
        EXPECT_EQ(r.bbox, MaskToBox(f.mask, r.instance_id));
        EXPECT_GT(r.bbox.max_dim(), 30.0);
        for (const Keypoint& k : r.keypoints) {
          if (k.visibility != 2) continue;
          EXPECT_GE(k.u, r.bbox.x);
          EXPECT_LT(k.u, r.bbox.right());
          EXPECT_GE(k.v, r.bbox.y);
          EXPECT_LT(k.v, r.bbox.bottom());
        }
      }
    }
  }
}

// World mirror x -> -x applied to a scene, a camera and therefore the image.
SceneInstance Mirror(const SceneInstance& inst) {
  SceneInstance m = inst;
  for (Vec3& v : m.base_vertices) v.x() = -v.x();
  for (std::uint8_t& g : m.group_of_vertex) {
    if (g != 0) g = static_cast<std::uint8_t>(FlipPartner(SchemaTag::kZebra27, g - 1) + 1);
  }
  m.placement.yaw = -m.placement.yaw;
  m.placement.translation.x() = -m.placement.translation.x();
  return m;
}

CameraModel Mirror(const CameraModel& cam) {
  const Mat3 s = Vec3(-1, 1, 1).asDiagonal();
  return CameraModel::FromMatrix(s * cam.position(), s * cam.rotation() * s, cam.fx(), cam.fy(),
                                 cam.width() - cam.cx(), cam.cy(), cam.width(), cam.height());
}

TEST(AnnotateFrameTest, MirrorSwapsFlipPartners) {
  const SceneSpec scene = GenerateScene(testing::SmallSceneConfig(12, 320, 240));
  SceneSpec mirrored = scene;
  for (SceneInstance& inst : mirrored.instances) inst = Mirror(inst);
  for (CameraModel& cam : mirrored.cameras) cam = Mirror(cam);
  for (std::size_t c = 0; c < scene.cameras.size(); ++c) {
    const CameraModel& cam = scene.cameras[c];
    const RenderedFrame f = Rasterize(scene, cam);
    const RenderedFrame g = Rasterize(mirrored, mirrored.cameras[c]);
    int mismatched = 0;
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) mismatched += f.mask.at(x, y) != g.mask.at(f.width - 1 - x, y);
    }
    EXPECT_LE(mismatched, 2);
    const auto a = AnnotateFrame(scene, cam, f);
    const auto b = AnnotateFrame(mirrored, mirrored.cameras[c], g);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      ASSERT_EQ(a[i].instance_id, b[i].instance_id);
      EXPECT_EQ(b[i].bbox.x, cam.width() - a[i].bbox.right());
      EXPECT_EQ(b[i].bbox.w, a[i].bbox.w);
      for (int k = 0; k < 27; ++k) {
        const Keypoint& ka = a[i].keypoints[FlipPartner(SchemaTag::kZebra27, k)];
        const Keypoint& kb = b[i].keypoints[k];
        EXPECT_NEAR(kb.u, cam.width() - ka.u, 1e-6);
        EXPECT_NEAR(kb.v, ka.v, 1e-6);
        EXPECT_EQ(kb.visibility, ka.visibility);
      }
    }
  }
}

TEST(AnnotateFrameTest, ConsistencyErrors) {
  const SceneSpec scene = GenerateScene(testing::SmallSceneConfig(2, 64, 48));
  RenderedFrame f = PaintedFrame(scene, scene.cameras[0], {{999, {0, 0, 40, 40}}});
  EXPECT_EQ(CodeOf([&] { AnnotateFrame(scene, scene.cameras[0], f); }), ErrorCode::kConsistency);
  f.mask = InstanceMask(10, 10);
  f.width = 10;
  EXPECT_EQ(CodeOf([&] { AnnotateFrame(scene, scene.cameras[0], f); }), ErrorCode::kConsistency);
}

TEST(SchemaMappingTest, NoseCopiesAndRoundTrip) {
  const SchemaMapping m = DefaultMapping17To27();
  m.Validate();
  Rng rng(2);
  const AnnotationRecord src = testing::RandomRecord(rng, SchemaTag::kQuadruped17, 1, 1);
  const AnnotationRecord mapped = MapSchema(src, m);
  EXPECT_EQ(mapped.schema, SchemaTag::kZebra27);
  EXPECT_EQ(mapped.keypoints[kNose], src.keypoints[2]);
  EXPECT_EQ(mapped.keypoints[kNeckStart], src.keypoints[3]);
  EXPECT_EQ(mapped.keypoints[kSkull].visibility, 0);
  EXPECT_EQ(mapped.keypoints[kBodyMiddle].visibility, 0);
  EXPECT_EQ(MapSchema(mapped, m.Inverse()), src);
}

TEST(SchemaMappingTest, UnlabeledStaysUnlabeled) {
  AnnotationRecord rec;
  rec.schema = SchemaTag::kQuadruped17;
  rec.bbox = {0, 0, 5, 5};
  rec.keypoints.assign(17, Keypoint{});
  for (const Keypoint& k : MapSchema(rec, DefaultMapping17To27()).keypoints) {
    EXPECT_EQ(k.visibility, 0);
  }
}

TEST(SchemaMappingTest, Errors) {
  AnnotationRecord rec;
  rec.schema = SchemaTag::kZebra27;
  rec.keypoints.assign(27, Keypoint{});
  EXPECT_EQ(CodeOf([&] { MapSchema(rec, DefaultMapping17To27()); }), ErrorCode::kMapping);
  SchemaMapping bad = DefaultMapping17To27();
  bad.pairs.push_back({0, kSkull});
  EXPECT_EQ(CodeOf([&] { bad.Validate(); }), ErrorCode::kMapping);
  EXPECT_EQ(CodeOf([] { SchemaMappingFromJson("{\"source\": \"quadruped17\"}"); }),
            ErrorCode::kMapping);
  EXPECT_EQ(CodeOf([] {
              SchemaMappingFromJson(
                  R"({"source": "quadruped17", "target": "zebra27", "pairs": [["tail", "nose"]]})");
            }),
            ErrorCode::kMapping);
}

TEST(SchemaMappingTest, ShippedDataFileMatchesDefault) {
  const SchemaMapping m =
      LoadSchemaMapping(std::filesystem::path(HERDSYNTH_SOURCE_DIR) / "data/schema_map_17_27.json");
  const SchemaMapping d = DefaultMapping17To27();
  EXPECT_EQ(m.source, d.source);
  EXPECT_EQ(m.target, d.target);
  EXPECT_EQ(m.pairs, d.pairs);
  EXPECT_EQ(SchemaMappingFromJson(SchemaMappingToJson(d)).pairs, d.pairs);
}

TEST(SchemaTest, NamesUniqueAndFlipPairsSymmetric) {
  for (SchemaTag tag : {SchemaTag::kQuadruped17, SchemaTag::kZebra27}) {
    const auto names = SchemaKeypointNames(tag);
    EXPECT_EQ(static_cast<int>(names.size()), SchemaSize(tag));
    EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), names.size());
    for (int k = 0; k < SchemaSize(tag); ++k) {
      EXPECT_EQ(FlipPartner(tag, FlipPartner(tag, k)), k);
    }
    EXPECT_EQ(SchemaFromName(SchemaName(tag)), tag);
  }
  const auto filtered = EvalMaskFiltered(SchemaTag::kZebra27);
  EXPECT_EQ(std::count(filtered.begin(), filtered.end(), false), 5);
  for (int k : {kThighLF, kThighRF, kThighRB, kThighLB, kTailStart}) EXPECT_FALSE(filtered[k]);
}

}  // namespace
}  // namespace herdsynth
