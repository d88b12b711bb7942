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

#include <sstream>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "herdsynth/augment.h"
#include "herdsynth/cli.h"
#include "herdsynth/datasets.h"
#include "herdsynth/error.h"
#include "herdsynth/keypoints.h"
#include "herdsynth/metrics.h"
#include "herdsynth/mock_render.h"
#include "herdsynth/scene_layout.h"
#include "herdsynth/version.h"

namespace py = pybind11;

namespace herdsynth {
namespace {

using MaskArray = py::array_t<InstanceId, py::array::c_style | py::array::forcecast>;

py::array_t<InstanceId> MaskToArray(const InstanceMask& mask) {
  py::array_t<InstanceId> out({mask.height(), mask.width()});
  std::copy(mask.ids().begin(), mask.ids().end(), out.mutable_data());
  return out;
}

InstanceMask ArrayToMask(const MaskArray& arr) {
  if (arr.ndim() != 2) throw py::value_error("mask must be a 2-D array");
  const int h = static_cast<int>(arr.shape(0));
  const int w = static_cast<int>(arr.shape(1));
  return InstanceMask(w, h, std::vector<InstanceId>(arr.data(), arr.data() + arr.size()));
}

PixelBox ToBox(const std::vector<double>& v) {
  if (v.size() != 4) throw py::value_error("a box is [x, y, w, h]");
  return {v[0], v[1], v[2], v[3]};
}

std::vector<double> FromBox(const PixelBox& b) { return {b.x, b.y, b.w, b.h}; }

const CameraModel& CameraAt(const SceneSpec& scene, std::size_t index) {
  if (index >= scene.cameras.size()) throw py::index_error("camera index out of range");
  return scene.cameras[index];
}

py::dict RecordToDict(const AnnotationRecord& r) {
  py::list kps;
  for (const Keypoint& k : r.keypoints) kps.append(py::make_tuple(k.u, k.v, k.visibility));
  py::dict d;
  d["id"] = r.id;
  d["image_id"] = r.image_id;
  d["instance_id"] = r.instance_id;
  d["bbox"] = FromBox(r.bbox);
  d["area"] = r.area;
  d["keypoints"] = kps;
  return d;
}

std::vector<Keypoint> ToKeypoints(const std::vector<std::vector<double>>& rows) {
  std::vector<Keypoint> out;
  for (const auto& row : rows) {
    if (row.size() != 2 && row.size() != 3) throw py::value_error("keypoints are (u, v[, vis])");
    out.push_back({row[0], row[1], row.size() == 3 ? static_cast<int>(row[2]) : 2});
  }
  return out;
}

}  // namespace
}  // namespace herdsynth

PYBIND11_MODULE(_core, m) {
  using namespace herdsynth;
  m.doc() = "Synthetic herd datasets: scene layout, mock rendering, labels, augmentation, metrics";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::exception<Error>(m, "HerdsynthError"); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(ErrorCodeName(e.code())) + ": " + e.what();
      py::set_error(error_type.get_stored(), msg.c_str());
    }
  });

  m.def("version", [] { return std::string(Version()); });

  py::class_<SceneConfig>(m, "SceneConfig")
      .def(py::init<>())
      .def_readwrite("num_instances", &SceneConfig::num_instances)
      .def_readwrite("num_cameras", &SceneConfig::num_cameras)
      .def_readwrite("pose_library_size", &SceneConfig::pose_library_size)
      .def_readwrite("scale_range", &SceneConfig::scale_range)
      .def_readwrite("distance_range", &SceneConfig::distance_range)
      .def_readwrite("seed", &SceneConfig::seed)
      .def_property(
          "extent", [](const SceneConfig& c) { return c.bounds.max.x(); },
          [](SceneConfig& c, double e) {
            c.bounds = Aabb{Vec3(-e, -e, 0.0), Vec3(e, e, 0.0)};
          })
      .def_property(
          "image_size", [](const SceneConfig& c) { return std::make_pair(c.rig.width, c.rig.height); },
          [](SceneConfig& c, std::pair<int, int> wh) {
            c.rig.width = wh.first;
            c.rig.height = wh.second;
          })
      .def_property(
          "hfov_deg", [](const SceneConfig& c) { return c.rig.hfov_deg; },
          [](SceneConfig& c, double v) { c.rig.hfov_deg = v; });

  py::class_<SceneSpec>(m, "Scene")
      .def_property_readonly("num_instances", [](const SceneSpec& s) { return s.instances.size(); })
      .def_property_readonly("num_cameras", [](const SceneSpec& s) { return s.cameras.size(); })
      .def_property_readonly("attempted", [](const SceneSpec& s) { return s.attempted; })
      .def_property_readonly("discarded", &SceneSpec::discarded)
      .def_property_readonly("instance_ids",
                             [](const SceneSpec& s) {
                               std::vector<InstanceId> ids;
                               for (const auto& i : s.instances) ids.push_back(i.id);
                               return ids;
                             })
      .def("to_json", &SceneToJson)
      .def_static("from_json", &SceneFromJson)
      .def("save", [](const SceneSpec& s, const std::filesystem::path& p) { SaveScene(s, p); })
      .def_static("load", [](const std::filesystem::path& p) { return LoadScene(p); })
      .def("project",
           [](const SceneSpec& s, std::size_t cam, std::vector<double> xyz) {
             if (xyz.size() != 3) throw py::value_error("a point is [x, y, z]");
             const Projection p = Project(Vec3(xyz[0], xyz[1], xyz[2]), CameraAt(s, cam));
             return py::make_tuple(p.u, p.v, p.depth);
           },
           py::arg("camera"), py::arg("point"));

  m.def("generate_scene", &GenerateScene, py::arg("config"));

  m.def(
      "render",
      [](const SceneSpec& scene, std::size_t camera) {
        RenderedFrame f;
        {
          py::gil_scoped_release release;
          f = Rasterize(scene, CameraAt(scene, camera));
        }
        py::array_t<float> depth({f.height, f.width});
        std::copy(f.depth.begin(), f.depth.end(), depth.mutable_data());
        return py::make_tuple(MaskToArray(f.mask), depth);
      },
      py::arg("scene"), py::arg("camera"),
      "Returns (instance-id mask uint16 HxW, depth float32 HxW).");

  m.def(
      "annotate",
      [](const SceneSpec& scene, std::size_t camera, const MaskArray& mask, double min_dim) {
        const CameraModel& cam = CameraAt(scene, camera);
        RenderedFrame f;
        f.mask = ArrayToMask(mask);
        f.width = f.mask.width();
        f.height = f.mask.height();
        py::list out;
        for (const AnnotationRecord& r : AnnotateFrame(scene, cam, f, min_dim)) {
          out.append(RecordToDict(r));
        }
        return out;
      },
      py::arg("scene"), py::arg("camera"), py::arg("mask"), py::arg("min_dim") = 30.0);

  m.def(
      "mask_to_box",
      [](const MaskArray& mask, InstanceId id) {
        return FromBox(MaskToBox(ArrayToMask(mask), id));
      },
      py::arg("mask"), py::arg("instance_id"));

  m.def("iou", [](const std::vector<double>& a, const std::vector<double>& b) {
    return Iou(ToBox(a), ToBox(b));
  });

  m.def(
      "crop_region",
      [](const std::vector<double>& bbox, int width, int height, int max_offset,
         std::uint64_t seed) {
        Rng rng(seed);
        return FromBox(CropRegion(ToBox(bbox), width, height, max_offset, rng));
      },
      py::arg("bbox"), py::arg("width"), py::arg("height"), py::arg("max_offset") = 150,
      py::arg("seed") = 0);

  m.def(
      "scale_mask",
      [](const MaskArray& mask, const std::vector<double>& region, int out_w, int out_h) {
        return MaskToArray(ScaleMask(ArrayToMask(mask), ToBox(region), out_w, out_h));
      },
      py::arg("mask"), py::arg("region"), py::arg("out_width"), py::arg("out_height"));

  py::class_<DatasetManifest>(m, "Manifest")
      .def(py::init<>())
      .def_readwrite("name", &DatasetManifest::name)
      .def_property_readonly("num_images", [](const DatasetManifest& d) { return d.images.size(); })
      .def_property_readonly("num_annotations",
                             [](const DatasetManifest& d) { return d.annotations.size(); })
      .def_property_readonly("schema",
                             [](const DatasetManifest& d) { return std::string(SchemaName(d.schema)); })
      .def("to_json", &ToCocoJson)
      .def_static("from_json", [](const std::string& text) { return FromCocoJson(text); })
      .def("save", [](const DatasetManifest& d, const std::filesystem::path& p) { SaveCoco(d, p); })
      .def_static("load", [](const std::filesystem::path& p) { return LoadCoco(p); })
      .def("validate", &DatasetManifest::Validate)
      .def("__eq__", [](const DatasetManifest& a, const DatasetManifest& b) { return a == b; });

  m.def(
      "split",
      [](const DatasetManifest& d, double ratio, std::uint64_t seed, bool largest_first) {
        SplitResult r = SplitByVideo(d, ratio, seed, largest_first);
        return py::make_tuple(r.train, r.val, r.warnings);
      },
      py::arg("manifest"), py::arg("ratio") = 0.8, py::arg("seed") = 0,
      py::arg("largest_first") = false);

  m.def(
      "merge",
      [](const std::vector<DatasetManifest>& ds) { return Merge(ds).manifest; },
      py::arg("manifests"));

  m.def("convert_yolo", &ConvertYolo, py::arg("manifest"), py::arg("out_dir"));

  m.def(
      "bbox_ratio_cdf",
      [](const DatasetManifest& d) {
        RatioSamples r = BboxRatioCdf(d);
        return py::make_tuple(r.width_ratios, r.height_ratios);
      },
      py::arg("manifest"));

  m.def(
      "average_precision",
      [](const std::vector<std::tuple<std::int64_t, std::vector<double>, double>>& dets,
         const std::vector<std::pair<std::int64_t, std::vector<double>>>& gts, double thresh) {
        std::vector<Detection> d;
        for (const auto& [img, box, score] : dets) d.push_back({img, ToBox(box), score, 1});
        std::vector<GroundTruthBox> g;
        for (const auto& [img, box] : gts) g.push_back({img, ToBox(box), 1});
        return AveragePrecision(d, g, thresh);
      },
      py::arg("detections"), py::arg("ground_truth"), py::arg("iou_thresh") = 0.5,
      "detections: [(image_id, [x, y, w, h], score)], ground_truth: [(image_id, box)].");

  m.def(
      "pck",
      [](const std::vector<std::vector<double>>& pred, const std::vector<std::vector<double>>& gt,
         const std::vector<double>& bbox, double alpha, bool visible_only) {
        AnnotationRecord rec;
        rec.bbox = ToBox(bbox);
        rec.keypoints = ToKeypoints(gt);
        const PckCount c = Pck(ToKeypoints(pred), rec, alpha, {}, visible_only);
        return py::make_tuple(c.correct, c.evaluated);
      },
      py::arg("pred"), py::arg("gt"), py::arg("bbox"), py::arg("alpha") = 0.05,
      py::arg("visible_only") = false, "Returns (correct, evaluated).");

  m.def(
      "aggregate",
      [](const std::vector<std::tuple<std::string, std::int64_t, double>>& rows) {
        std::vector<DatasetScores> scores;
        for (const auto& [name, n, v] : rows) scores.push_back({name, n, {{"value", v}}});
        const EvalReport r = Aggregate(scores);
        return py::make_tuple(*r.average.at("value"), *r.weighted_average.at("value"));
      },
      py::arg("rows"), "rows: [(name, n_images, value)] -> (average, weighted average).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = RunCli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (status, stdout, stderr).");
}
