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

#include "herdsynth/datasets.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "herdsynth/error.h"
#include "herdsynth/rng.h"

namespace herdsynth {

using nlohmann::json;

void DatasetManifest::Validate() const {
  std::set<std::int64_t> ids;
  for (const ImageEntry& img : images) {
    HERDSYNTH_ENFORCE(ids.insert(img.id).second, ErrorCode::kDanglingReference,
                      "duplicate image id " + std::to_string(img.id));
  }
  for (const AnnotationRecord& rec : annotations) {
    HERDSYNTH_ENFORCE(ids.count(rec.image_id) > 0, ErrorCode::kDanglingReference,
                      "annotation " + std::to_string(rec.id) + " references missing image " +
                          std::to_string(rec.image_id));
    HERDSYNTH_ENFORCE(rec.schema == schema, ErrorCode::kSchema,
                      "annotation " + std::to_string(rec.id) + " uses schema " +
                          std::string(SchemaName(rec.schema)) + " in a " +
                          std::string(SchemaName(schema)) + " dataset");
    HERDSYNTH_ENFORCE(static_cast<int>(rec.keypoints.size()) == SchemaSize(schema),
                      ErrorCode::kSchema,
                      "annotation " + std::to_string(rec.id) + " has the wrong keypoint count");
  }
}

const ImageEntry* DatasetManifest::FindImage(std::int64_t id) const {
  for (const ImageEntry& img : images) {
    if (img.id == id) return &img;
  }
  return nullptr;
}

// --- COCO JSON --------------------------------------------------------------

namespace {

json BoxJson(const PixelBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

json CategoryJson(const Category& c, SchemaTag schema) {
  json j{{"id", c.id}, {"name", c.name}, {"supercategory", "animal"}};
  if (schema != SchemaTag::kNone) {
    j["keypoints"] = SchemaKeypointNames(schema);
    json pairs = json::array();
    for (const auto& [a, b] : SchemaFlipPairs(schema)) pairs.push_back({a, b});
    j["flip_pairs"] = pairs;
    j["skeleton"] = json::array();
  }
  return j;
}

json ImageJson(const ImageEntry& img) {
  json j{{"id", img.id},
         {"file_name", img.file_name},
         {"width", img.width},
         {"height", img.height}};
  if (img.video_id) j["video_id"] = *img.video_id;
  if (img.split) j["split"] = *img.split;
  if (img.mask_file) j["mask_file"] = *img.mask_file;
  if (img.provenance) {
    j["crop_provenance"] = {{"source_image_id", img.provenance->source_image_id},
                            {"target_instance_id", img.provenance->target_instance_id},
                            {"crop_region", BoxJson(img.provenance->crop_region)}};
  }
  return j;
}

json AnnotationJson(const AnnotationRecord& rec) {
  json j{{"id", rec.id},
         {"image_id", rec.image_id},
         {"category_id", rec.category_id},
         {"bbox", BoxJson(rec.bbox)},
         {"area", rec.area},
         {"iscrowd", 0},
         {"instance_id", rec.instance_id}};
  if (rec.schema != SchemaTag::kNone) {
    json kps = json::array();
    for (const Keypoint& k : rec.keypoints) {
      kps.push_back(k.u);
      kps.push_back(k.v);
      kps.push_back(k.visibility);
    }
    j["keypoints"] = kps;
    j["num_keypoints"] = rec.NumLabeled();
  }
  if (rec.segmentation.mask_id) {
    j["segmentation"] = {{"mask_id", *rec.segmentation.mask_id}};
  } else {
    j["segmentation"] = rec.segmentation.polygons;
  }
  return j;
}

// Structural access with JSON-pointer error locations.
class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void Fail(const std::string& ptr, const std::string& msg) const {
    throw Error(ErrorCode::kParse, origin_ + ": at " + (ptr.empty() ? "/" : ptr) + ": " + msg);
  }

  const json& At(const json& obj, const std::string& key, const std::string& ptr) const {
    if (!obj.is_object()) Fail(ptr, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) Fail(ptr, "missing key '" + key + "'");
    return *it;
  }

  const json& Array(const json& obj, const std::string& key, const std::string& ptr) const {
    const json& v = At(obj, key, ptr);
    if (!v.is_array()) Fail(ptr + "/" + key, "expected an array");
    return v;
  }

  template <typename T>
  T Get(const json& v, const std::string& ptr) const {
    try {
      return v.get<T>();
    } catch (const json::exception& e) {
      Fail(ptr, e.what());
    }
  }

  template <typename T>
  T Field(const json& obj, const std::string& key, const std::string& ptr) const {
    return Get<T>(At(obj, key, ptr), ptr + "/" + key);
  }

  PixelBox Box(const json& v, const std::string& ptr) const {
    if (!v.is_array() || v.size() != 4) Fail(ptr, "expected [x, y, w, h]");
    return {Get<double>(v[0], ptr + "/0"), Get<double>(v[1], ptr + "/1"),
            Get<double>(v[2], ptr + "/2"), Get<double>(v[3], ptr + "/3")};
  }

 private:
  std::string origin_;
};

std::string Idx(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

SchemaTag InferSchema(const json& doc, const Reader& r) {
  if (doc.contains("info") && doc["info"].is_object() && doc["info"].contains("schema")) {
    const std::string name = r.Field<std::string>(doc["info"], "schema", "/info");
    const auto tag = SchemaFromName(name);
    if (!tag) r.Fail("/info/schema", "unknown schema '" + name + "'");
    return *tag;
  }
  if (doc.contains("categories") && doc["categories"].is_array()) {
    for (const json& c : doc["categories"]) {
      if (c.is_object() && c.contains("keypoints") && c["keypoints"].is_array()) {
        const std::size_t n = c["keypoints"].size();
        if (n == static_cast<std::size_t>(kNumZebraKeypoints)) return SchemaTag::kZebra27;
        if (n == static_cast<std::size_t>(SchemaSize(SchemaTag::kQuadruped17))) {
          return SchemaTag::kQuadruped17;
        }
      }
    }
  }
  return SchemaTag::kNone;
}

}  // namespace

std::string ToCocoJson(const DatasetManifest& manifest) {
  json images = json::array();
  for (const ImageEntry& img : manifest.images) images.push_back(ImageJson(img));
  json annotations = json::array();
  for (const AnnotationRecord& rec : manifest.annotations) annotations.push_back(AnnotationJson(rec));
  json categories = json::array();
  for (const Category& c : manifest.categories) categories.push_back(CategoryJson(c, manifest.schema));
  const json doc{{"info", {{"name", manifest.name}, {"schema", std::string(SchemaName(manifest.schema))}}},
                 {"images", images},
                 {"annotations", annotations},
                 {"categories", categories}};
  return doc.dump(2, ' ', false, json::error_handler_t::strict) + "\n";
}

DatasetManifest FromCocoJson(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse,
                origin + ": at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  const Reader r(origin);
  if (!doc.is_object()) r.Fail("", "expected a top-level object");

  DatasetManifest m;
  m.schema = InferSchema(doc, r);
  if (doc.contains("info") && doc["info"].is_object() && doc["info"].contains("name")) {
    m.name = r.Field<std::string>(doc["info"], "name", "/info");
  }

  const json& images = r.Array(doc, "images", "");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string p = Idx("/images", i);
    const json& j = images[i];
    ImageEntry img;
    img.id = r.Field<std::int64_t>(j, "id", p);
    img.file_name = r.Field<std::string>(j, "file_name", p);
    img.width = r.Field<int>(j, "width", p);
    img.height = r.Field<int>(j, "height", p);
    if (j.contains("video_id") && !j["video_id"].is_null()) {
      img.video_id = r.Field<std::int64_t>(j, "video_id", p);
    }
    if (j.contains("split")) img.split = r.Field<std::string>(j, "split", p);
    if (j.contains("mask_file")) img.mask_file = r.Field<std::string>(j, "mask_file", p);
    if (j.contains("crop_provenance")) {
      const std::string pp = p + "/crop_provenance";
      const json& cp = j["crop_provenance"];
      CropProvenance prov;
      prov.source_image_id = r.Field<std::int64_t>(cp, "source_image_id", pp);
      prov.target_instance_id = r.Field<InstanceId>(cp, "target_instance_id", pp);
      prov.crop_region = r.Box(r.At(cp, "crop_region", pp), pp + "/crop_region");
      img.provenance = prov;
    }
    m.images.push_back(std::move(img));
  }

  const int nk = SchemaSize(m.schema);
  const json& anns = r.Array(doc, "annotations", "");
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const std::string p = Idx("/annotations", i);
    const json& j = anns[i];
    AnnotationRecord rec;
    rec.id = r.Field<std::int64_t>(j, "id", p);
    rec.image_id = r.Field<std::int64_t>(j, "image_id", p);
    rec.category_id = j.contains("category_id") ? r.Field<int>(j, "category_id", p) : 1;
    rec.bbox = r.Box(r.At(j, "bbox", p), p + "/bbox");
    rec.area = j.contains("area") ? r.Field<double>(j, "area", p) : rec.bbox.area();
    if (j.contains("instance_id")) rec.instance_id = r.Field<InstanceId>(j, "instance_id", p);
    rec.schema = m.schema;
    if (nk > 0) {
      const json& kps = r.Array(j, "keypoints", p);
      if (kps.size() != static_cast<std::size_t>(3 * nk)) {
        throw Error(ErrorCode::kSchema, origin + ": at " + p + "/keypoints: expected " +
                                            std::to_string(3 * nk) + " values, got " +
                                            std::to_string(kps.size()));
      }
      for (int k = 0; k < nk; ++k) {
        const std::string kp = p + "/keypoints/" + std::to_string(3 * k);
        rec.keypoints.push_back({r.Get<double>(kps[3 * k], kp), r.Get<double>(kps[3 * k + 1], kp),
                                 r.Get<int>(kps[3 * k + 2], kp)});
      }
    }
    if (j.contains("segmentation")) {
      const json& seg = j["segmentation"];
      const std::string sp = p + "/segmentation";
      if (seg.is_object() && seg.contains("mask_id")) {
        rec.segmentation.mask_id = r.Field<InstanceId>(seg, "mask_id", sp);
      } else if (seg.is_array()) {
        rec.segmentation.polygons = r.Get<std::vector<std::vector<double>>>(seg, sp);
      }
    }
    m.annotations.push_back(std::move(rec));
  }

  m.categories.clear();
  if (doc.contains("categories")) {
    const json& cats = r.Array(doc, "categories", "");
    for (std::size_t i = 0; i < cats.size(); ++i) {
      const std::string p = Idx("/categories", i);
      m.categories.push_back({r.Field<int>(cats[i], "id", p), r.Field<std::string>(cats[i], "name", p)});
    }
  }
  m.Validate();
  return m;
}

void SaveCoco(const DatasetManifest& manifest, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  HERDSYNTH_ENFORCE(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  out << ToCocoJson(manifest);
  HERDSYNTH_ENFORCE(out.good(), ErrorCode::kIo, "write failed: " + path.string());
}

DatasetManifest LoadCoco(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  HERDSYNTH_ENFORCE(in.good(), ErrorCode::kIo, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return FromCocoJson(ss.str(), path.string());
}

// --- YOLO -------------------------------------------------------------------

std::string YoloLine(const AnnotationRecord& record, const ImageEntry& image,
                     const DatasetManifest& manifest) {
  HERDSYNTH_ENFORCE(image.width > 0 && image.height > 0, ErrorCode::kConversion,
                    "image " + std::to_string(image.id) + " has zero size");
  std::vector<int> ids;
  for (const Category& c : manifest.categories) ids.push_back(c.id);
  std::sort(ids.begin(), ids.end());
  const auto it = std::lower_bound(ids.begin(), ids.end(), record.category_id);
  HERDSYNTH_ENFORCE(it != ids.end() && *it == record.category_id, ErrorCode::kConversion,
                    "annotation " + std::to_string(record.id) + " has unknown category " +
                        std::to_string(record.category_id));
  const double w = image.width;
  const double h = image.height;
  const double x0 = std::clamp(record.bbox.x, 0.0, w);
  const double y0 = std::clamp(record.bbox.y, 0.0, h);
  const double x1 = std::clamp(record.bbox.right(), 0.0, w);
  const double y1 = std::clamp(record.bbox.bottom(), 0.0, h);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f", static_cast<int>(it - ids.begin()),
                0.5 * (x0 + x1) / w, 0.5 * (y0 + y1) / h, (x1 - x0) / w, (y1 - y0) / h);
  return buf;
}

std::vector<std::filesystem::path> ConvertYolo(const DatasetManifest& manifest,
                                               const std::filesystem::path& out_dir) {
  std::map<std::int64_t, std::vector<const AnnotationRecord*>> by_image;
  for (const AnnotationRecord& rec : manifest.annotations) by_image[rec.image_id].push_back(&rec);
  std::vector<std::filesystem::path> written;
  for (const ImageEntry& img : manifest.images) {
    HERDSYNTH_ENFORCE(img.width > 0 && img.height > 0, ErrorCode::kConversion,
                      "image " + std::to_string(img.id) + " has zero size");
    std::filesystem::path rel(img.file_name);
    rel.replace_extension(".txt");
    const std::filesystem::path path = out_dir / rel.relative_path();
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    HERDSYNTH_ENFORCE(out.good(), ErrorCode::kIo, "cannot write " + path.string());
    for (const AnnotationRecord* rec : by_image[img.id]) {
      out << YoloLine(*rec, img, manifest) << "\n";
    }
    written.push_back(path);
  }
  return written;
}

// --- split ------------------------------------------------------------------

SplitResult SplitByVideo(const DatasetManifest& manifest, double ratio, std::uint64_t seed,
                         bool largest_first) {
  HERDSYNTH_ENFORCE(ratio > 0.0 && ratio < 1.0, ErrorCode::kConfiguration,
                    "split ratio must lie strictly between 0 and 1");
  // Group key: (0, video_id) or (1, image_id) for images without a video.
  std::map<std::pair<int, std::int64_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < manifest.images.size(); ++i) {
    const ImageEntry& img = manifest.images[i];
    const auto key = img.video_id ? std::make_pair(0, *img.video_id) : std::make_pair(1, img.id);
    groups[key].push_back(i);
  }
  std::vector<const std::vector<std::size_t>*> order;
  for (const auto& [key, members] : groups) order.push_back(&members);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  if (largest_first) {
    std::stable_sort(order.begin(), order.end(),
                     [](const auto* a, const auto* b) { return a->size() > b->size(); });
  }

  const double target = ratio * static_cast<double>(manifest.images.size());
  std::vector<char> in_train(manifest.images.size(), 0);
  std::size_t train_count = 0;
  for (const auto* members : order) {
    if (static_cast<double>(train_count) >= target) break;
    for (std::size_t i : *members) in_train[i] = 1;
    train_count += members->size();
  }

  SplitResult out;
  for (DatasetManifest* part : {&out.train, &out.val}) {
    part->schema = manifest.schema;
    part->categories = manifest.categories;
  }
  out.train.name = manifest.name + "_train";
  out.val.name = manifest.name + "_val";
  std::map<std::int64_t, bool> image_train;
  for (std::size_t i = 0; i < manifest.images.size(); ++i) {
    ImageEntry img = manifest.images[i];
    img.split = in_train[i] ? "train" : "val";
    image_train[img.id] = in_train[i] != 0;
    (in_train[i] ? out.train : out.val).images.push_back(std::move(img));
  }
  for (const AnnotationRecord& rec : manifest.annotations) {
    const auto it = image_train.find(rec.image_id);
    HERDSYNTH_ENFORCE(it != image_train.end(), ErrorCode::kDanglingReference,
                      "annotation " + std::to_string(rec.id) + " references missing image " +
                          std::to_string(rec.image_id));
    (it->second ? out.train : out.val).annotations.push_back(rec);
  }
  if (groups.size() == 1) {
    out.warnings.push_back("dataset holds a single video; validation split is empty");
  } else if (out.val.images.empty()) {
    out.warnings.push_back("validation split is empty");
  }
  return out;
}

// --- merge ------------------------------------------------------------------

namespace {

std::optional<SchemaMapping> FindMapping(SchemaTag from, SchemaTag to,
                                         const std::vector<SchemaMapping>& mappings) {
  for (const SchemaMapping& m : mappings) {
    if (m.source == from && m.target == to) return m;
  }
  for (const SchemaMapping& m : mappings) {
    if (m.source == to && m.target == from) return m.Inverse();
  }
  return std::nullopt;
}

}  // namespace

MergeResult Merge(const std::vector<DatasetManifest>& manifests,
                  std::optional<SchemaTag> target_schema,
                  const std::vector<SchemaMapping>& mappings) {
  HERDSYNTH_ENFORCE(!manifests.empty(), ErrorCode::kMerge, "nothing to merge");
  SchemaTag schema = SchemaTag::kNone;
  if (target_schema) {
    schema = *target_schema;
  } else {
    std::optional<SchemaTag> seen;
    for (const DatasetManifest& m : manifests) {
      if (m.annotations.empty()) continue;
      HERDSYNTH_ENFORCE(!seen || *seen == m.schema, ErrorCode::kMerge,
                        "cannot merge " + std::string(SchemaName(*seen)) + " with " +
                            std::string(SchemaName(m.schema)) + " without a target schema");
      seen = m.schema;
    }
    schema = seen ? *seen : manifests.front().schema;
  }

  MergeResult out;
  out.manifest.schema = schema;
  out.manifest.categories.clear();
  std::map<int, std::string> categories;
  std::map<std::string, int> file_uses;
  std::int64_t next_image = 1;
  std::int64_t next_ann = 1;

  for (std::size_t mi = 0; mi < manifests.size(); ++mi) {
    const DatasetManifest& m = manifests[mi];
    if (mi > 0) out.manifest.name += "+";
    out.manifest.name += m.name;
    for (const Category& c : m.categories) {
      const auto [it, inserted] = categories.emplace(c.id, c.name);
      HERDSYNTH_ENFORCE(inserted || it->second == c.name, ErrorCode::kMerge,
                        "category " + std::to_string(c.id) + " is named both '" + it->second +
                            "' and '" + c.name + "'");
    }

    std::optional<SchemaMapping> mapping;
    if (!m.annotations.empty() && m.schema != schema) {
      mapping = FindMapping(m.schema, schema, mappings);
      HERDSYNTH_ENFORCE(mapping.has_value(), ErrorCode::kMerge,
                        "no mapping from " + std::string(SchemaName(m.schema)) + " to " +
                            std::string(SchemaName(schema)));
    }

    std::map<std::int64_t, std::int64_t> image_ids;
    for (const ImageEntry& img : m.images) {
      ImageEntry copy = img;
      copy.id = next_image++;
      HERDSYNTH_ENFORCE(image_ids.emplace(img.id, copy.id).second, ErrorCode::kMerge,
                        "duplicate image id " + std::to_string(img.id) + " in " + m.name);
      ++file_uses[img.file_name];
      out.manifest.images.push_back(std::move(copy));
    }
    for (const AnnotationRecord& rec : m.annotations) {
      AnnotationRecord copy = mapping ? MapSchema(rec, *mapping) : rec;
      const auto it = image_ids.find(rec.image_id);
      HERDSYNTH_ENFORCE(it != image_ids.end(), ErrorCode::kDanglingReference,
                        "annotation " + std::to_string(rec.id) + " in " + m.name +
                            " references missing image " + std::to_string(rec.image_id));
      copy.image_id = it->second;
      copy.id = next_ann++;
      out.manifest.annotations.push_back(std::move(copy));
    }
  }
  for (const auto& [id, name] : categories) out.manifest.categories.push_back({id, name});
  for (const auto& [file, uses] : file_uses) {
    if (uses > 1) out.duplicate_file_paths.push_back(file);
  }
  return out;
}

// --- bbox statistics --------------------------------------------------------

RatioSamples BboxRatioCdf(const DatasetManifest& manifest) {
  std::map<std::int64_t, const ImageEntry*> images;
  for (const ImageEntry& img : manifest.images) images[img.id] = &img;
  RatioSamples out;
  for (const AnnotationRecord& rec : manifest.annotations) {
    const auto it = images.find(rec.image_id);
    HERDSYNTH_ENFORCE(it != images.end(), ErrorCode::kDanglingReference,
                      "annotation " + std::to_string(rec.id) + " references missing image " +
                          std::to_string(rec.image_id));
    const ImageEntry& img = *it->second;
    HERDSYNTH_ENFORCE(img.width > 0 && img.height > 0, ErrorCode::kConversion,
                      "image " + std::to_string(img.id) + " has zero size");
    out.width_ratios.push_back(rec.bbox.w / img.width);
    out.height_ratios.push_back(rec.bbox.h / img.height);
  }
  std::sort(out.width_ratios.begin(), out.width_ratios.end());
  std::sort(out.height_ratios.begin(), out.height_ratios.end());
  return out;
}

std::string RatioSamplesCsv(const RatioSamples& samples) {
  std::ostringstream out;
  out << "rank,cdf,width_ratio,height_ratio\n";
  const std::size_t n = samples.width_ratios.size();
  char buf[160];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g\n", i + 1,
                  static_cast<double>(i + 1) / static_cast<double>(n), samples.width_ratios[i],
                  samples.height_ratios[i]);
    out << buf;
  }
  return out.str();
}

double EmpiricalQuantile(const std::vector<double>& sorted, double q) {
  HERDSYNTH_ENFORCE(!sorted.empty(), ErrorCode::kInvalidArgument, "no samples");
  HERDSYNTH_ENFORCE(q > 0.0 && q <= 1.0, ErrorCode::kInvalidArgument, "quantile must be in (0, 1]");
  const double n = static_cast<double>(sorted.size());
  const std::size_t k = static_cast<std::size_t>(std::ceil(q * n - 1e-12));
  return sorted[std::min(sorted.size(), std::max<std::size_t>(k, 1)) - 1];
}

DominanceCheck QuantileDominance(const std::vector<double>& candidate_sorted,
                                 const std::vector<double>& reference_sorted, int steps) {
  HERDSYNTH_ENFORCE(steps >= 2, ErrorCode::kInvalidArgument, "need at least two quantile steps");
  DominanceCheck out;
  out.holds = true;
  for (int k = 1; k < steps; ++k) {
    const double q = static_cast<double>(k) / steps;
    const double c = EmpiricalQuantile(candidate_sorted, q);
    const double r = EmpiricalQuantile(reference_sorted, q);
    ++out.checked;
    if (c < r) out.holds = false;
    if (c > r) ++out.strict;
  }
  return out;
}

}  // namespace herdsynth
