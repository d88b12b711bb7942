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

#include "herdsynth/augment.h"

#include <algorithm>
#include <cmath>
#include <climits>
#include <map>
#include <string>

#include "herdsynth/error.h"
#include "herdsynth/parallel.h"

namespace herdsynth {

void AugmentConfig::Validate() const {
  HERDSYNTH_ENFORCE(area_threshold > 0.0, ErrorCode::kConfiguration,
                    "area_threshold must be positive");
  HERDSYNTH_ENFORCE(max_offset >= 0, ErrorCode::kConfiguration, "max_offset must be >= 0");
  HERDSYNTH_ENFORCE(output_width > 0 && output_height > 0, ErrorCode::kConfiguration,
                    "output size must be positive");
  HERDSYNTH_ENFORCE(min_visible_pixels >= 1, ErrorCode::kConfiguration,
                    "min_visible_pixels must be >= 1");
}

std::vector<std::size_t> SelectTargets(const std::vector<AnnotationRecord>& records,
                                       double area_threshold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].bbox.area() > area_threshold) out.push_back(i);
  }
  return out;
}

PixelBox CropRegion(const PixelBox& bbox, int frame_width, int frame_height, int max_offset,
                    Rng& rng) {
  HERDSYNTH_ENFORCE(max_offset >= 0, ErrorCode::kConfiguration, "max_offset must be >= 0");
  const double x0 = std::max(0.0, std::floor(bbox.x));
  const double y0 = std::max(0.0, std::floor(bbox.y));
  const double x1 = std::min(static_cast<double>(frame_width), std::ceil(bbox.right()));
  const double y1 = std::min(static_cast<double>(frame_height), std::ceil(bbox.bottom()));
  HERDSYNTH_ENFORCE(x1 > x0 && y1 > y0, ErrorCode::kInvalidArgument,
                    "bbox does not intersect the frame");
  const std::int64_t left = UniformInt(rng, 0, max_offset);
  const std::int64_t top = UniformInt(rng, 0, max_offset);
  const std::int64_t right = UniformInt(rng, 0, max_offset);
  const std::int64_t bottom = UniformInt(rng, 0, max_offset);
  const double rx0 = std::max(0.0, x0 - static_cast<double>(left));
  const double ry0 = std::max(0.0, y0 - static_cast<double>(top));
  const double rx1 = std::min(static_cast<double>(frame_width), x1 + static_cast<double>(right));
  const double ry1 = std::min(static_cast<double>(frame_height), y1 + static_cast<double>(bottom));
  return {rx0, ry0, rx1 - rx0, ry1 - ry0};
}

namespace {

struct IntRegion {
  int x0, y0, w, h;
};

IntRegion ToInt(const PixelBox& r, int frame_width, int frame_height) {
  const IntRegion out{static_cast<int>(r.x), static_cast<int>(r.y), static_cast<int>(r.w),
                      static_cast<int>(r.h)};
  HERDSYNTH_ENFORCE(out.x0 == r.x && out.y0 == r.y && out.w == r.w && out.h == r.h &&
                        out.w > 0 && out.h > 0 && out.x0 >= 0 && out.y0 >= 0 &&
                        out.x0 + out.w <= frame_width && out.y0 + out.h <= frame_height,
                    ErrorCode::kInvalidArgument, "crop region must be whole pixels inside the frame");
  return out;
}

// Source offset of output index i under nearest-neighbour sampling, exact in
// integer arithmetic: floor((2i + 1) * src / (2 * out)).
int NearestIndex(int i, int src, int out) {
  return static_cast<int>((static_cast<std::int64_t>(2 * i + 1) * src) / (2LL * out));
}

}  // namespace

InstanceMask ScaleMask(const InstanceMask& mask, const PixelBox& region, int out_width,
                       int out_height) {
  const IntRegion r = ToInt(region, mask.width(), mask.height());
  std::vector<int> cols(static_cast<std::size_t>(out_width));
  for (int i = 0; i < out_width; ++i) cols[i] = r.x0 + NearestIndex(i, r.w, out_width);
  InstanceMask out(out_width, out_height);
  for (int j = 0; j < out_height; ++j) {
    const int sy = r.y0 + NearestIndex(j, r.h, out_height);
    for (int i = 0; i < out_width; ++i) out.set(i, j, mask.at(cols[i], sy));
  }
  return out;
}

Image ScaleImage(const Image& image, const PixelBox& region, int out_width, int out_height) {
  const IntRegion r = ToInt(region, image.width, image.height);
  Image out{out_width, out_height, image.channels, {}};
  out.data.resize(static_cast<std::size_t>(out_width) * out_height * image.channels);
  struct Tap {
    int lo, hi;
    double t;
  };
  auto taps = [](int n_out, int n_src, int origin) {
    std::vector<Tap> v(static_cast<std::size_t>(n_out));
    for (int i = 0; i < n_out; ++i) {
      double s = (i + 0.5) * n_src / n_out - 0.5;
      s = std::clamp(s, 0.0, static_cast<double>(n_src - 1));
      const int lo = static_cast<int>(std::floor(s));
      const int hi = std::min(lo + 1, n_src - 1);
      v[i] = {origin + lo, origin + hi, s - lo};
    }
    return v;
  };
  const std::vector<Tap> tx = taps(out_width, r.w, r.x0);
  const std::vector<Tap> ty = taps(out_height, r.h, r.y0);
  std::size_t k = 0;
  for (int j = 0; j < out_height; ++j) {
    const Tap& b = ty[j];
    for (int i = 0; i < out_width; ++i) {
      const Tap& a = tx[i];
      for (int c = 0; c < image.channels; ++c) {
        const double top = (1.0 - a.t) * image.at(a.lo, b.lo, c) + a.t * image.at(a.hi, b.lo, c);
        const double bot = (1.0 - a.t) * image.at(a.lo, b.hi, c) + a.t * image.at(a.hi, b.hi, c);
        const double v = (1.0 - b.t) * top + b.t * bot;
        out.data[k++] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

CropSample CropAndScale(const InstanceMask& mask, const Image* image,
                        const std::vector<AnnotationRecord>& frame_records,
                        const AnnotationRecord& target, const AugmentConfig& cfg, Rng& rng) {
  cfg.Validate();
  HERDSYNTH_ENFORCE(std::find(mask.ids().begin(), mask.ids().end(), target.instance_id) != mask.ids().end(), ErrorCode::kConsistency,
                    "target instance " + std::to_string(target.instance_id) +
                        " is missing from the mask");
  if (image != nullptr) {
    HERDSYNTH_ENFORCE(image->width == mask.width() && image->height == mask.height(),
                      ErrorCode::kConsistency, "image and mask sizes differ");
  }

  CropSample out;
  out.target_instance_id = target.instance_id;
  out.region = CropRegion(target.bbox, mask.width(), mask.height(), cfg.max_offset, rng);
  out.mask = ScaleMask(mask, out.region, cfg.output_width, cfg.output_height);
  if (image != nullptr) {
    out.image = ScaleImage(*image, out.region, cfg.output_width, cfg.output_height);
  }

  const double sx = cfg.output_width / out.region.w;
  const double sy = cfg.output_height / out.region.h;
  std::map<InstanceId, const AnnotationRecord*> source;
  for (const AnnotationRecord& rec : frame_records) source[rec.instance_id] = &rec;

  struct Acc {
    int x0 = INT32_MAX, y0 = INT32_MAX, x1 = -1, y1 = -1;
    std::size_t pixels = 0;
  };
  std::map<InstanceId, Acc> boxes;
  for (int y = 0; y < out.mask.height(); ++y) {
    for (int x = 0; x < out.mask.width(); ++x) {
      const InstanceId id = out.mask.at(x, y);
      if (id == 0) continue;
      Acc& a = boxes[id];
      a.x0 = std::min(a.x0, x);
      a.y0 = std::min(a.y0, y);
      a.x1 = std::max(a.x1, x);
      a.y1 = std::max(a.y1, y);
      ++a.pixels;
    }
  }

  for (const auto& [id, acc] : boxes) {
    if (acc.pixels < static_cast<std::size_t>(cfg.min_visible_pixels)) continue;
    AnnotationRecord rec;
    const auto it = source.find(id);
    const AnnotationRecord* src = it == source.end() ? nullptr : it->second;
    rec.instance_id = id;
    rec.category_id = src ? src->category_id : target.category_id;
    rec.schema = src ? src->schema : target.schema;
    rec.bbox = {static_cast<double>(acc.x0), static_cast<double>(acc.y0),
                static_cast<double>(acc.x1 - acc.x0 + 1), static_cast<double>(acc.y1 - acc.y0 + 1)};
    rec.area = static_cast<double>(acc.pixels);
    rec.segmentation.mask_id = id;
    rec.keypoints.assign(static_cast<std::size_t>(SchemaSize(rec.schema)), Keypoint{});
    if (src != nullptr) {
      for (std::size_t k = 0; k < rec.keypoints.size() && k < src->keypoints.size(); ++k) {
        const Keypoint& kp = src->keypoints[k];
        if (kp.visibility == 0) continue;
        const double u = (kp.u - out.region.x) * sx;
        const double v = (kp.v - out.region.y) * sy;
        rec.keypoints[k] = {u, v, ClassifyVisibility(u, v, out.mask, id)};
      }
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::vector<CropSample> AugmentFrame(const InstanceMask& mask, const Image* image,
                                     const std::vector<AnnotationRecord>& frame_records,
                                     const AugmentConfig& cfg, Rng& rng) {
  std::vector<CropSample> out;
  for (std::size_t i : SelectTargets(frame_records, cfg.area_threshold)) {
    out.push_back(CropAndScale(mask, image, frame_records, frame_records[i], cfg, rng));
  }
  return out;
}

namespace {

std::string CropName(const std::string& file, std::size_t k) {
  std::filesystem::path p(file);
  const std::string ext = p.extension().string();
  p.replace_extension();
  return p.string() + "_crop" + std::to_string(k) + (ext.empty() ? ".png" : ext);
}

}  // namespace

DatasetManifest AugmentDataset(const DatasetManifest& manifest, const FrameLoader& loader,
                               const CropSink& sink, const AugmentConfig& cfg, int jobs) {
  cfg.Validate();
  manifest.Validate();
  std::map<std::int64_t, std::vector<AnnotationRecord>> by_image;
  for (const AnnotationRecord& rec : manifest.annotations) by_image[rec.image_id].push_back(rec);

  std::int64_t next_image = 1;
  std::int64_t next_ann = 1;
  for (const ImageEntry& img : manifest.images) next_image = std::max(next_image, img.id + 1);
  for (const AnnotationRecord& rec : manifest.annotations) next_ann = std::max(next_ann, rec.id + 1);

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < manifest.images.size(); ++i) {
    if (!SelectTargets(by_image[manifest.images[i].id], cfg.area_threshold).empty()) {
      todo.push_back(i);
    }
  }

  DatasetManifest out = manifest;
  const int workers = std::max(jobs, 1);
  const std::size_t chunk = static_cast<std::size_t>(workers) * 4;
  for (std::size_t begin = 0; begin < todo.size(); begin += chunk) {
    const std::size_t n = std::min(chunk, todo.size() - begin);
    std::vector<std::vector<CropSample>> results(n);
    ParallelFor(n, workers, [&](std::size_t k) {
      const ImageEntry& img = manifest.images[todo[begin + k]];
      const FrameInput frame = loader(img);
      HERDSYNTH_ENFORCE(frame.mask.width() == img.width && frame.mask.height() == img.height,
                        ErrorCode::kConsistency,
                        "mask size does not match image " + std::to_string(img.id));
      Rng rng(MixSeed(cfg.seed, static_cast<std::uint64_t>(img.id)));
      results[k] = AugmentFrame(frame.mask, frame.image ? &*frame.image : nullptr,
                                by_image[img.id], cfg, rng);
    });
    for (std::size_t k = 0; k < n; ++k) {
      const ImageEntry& src = manifest.images[todo[begin + k]];
      for (std::size_t c = 0; c < results[k].size(); ++c) {
        CropSample& crop = results[k][c];
        ImageEntry entry;
        entry.id = next_image++;
        entry.file_name = CropName(src.file_name, c);
        entry.width = cfg.output_width;
        entry.height = cfg.output_height;
        entry.video_id = src.video_id;
        entry.split = src.split;
        if (src.mask_file) entry.mask_file = CropName(*src.mask_file, c);
        entry.provenance = CropProvenance{src.id, crop.target_instance_id, crop.region};
        for (AnnotationRecord& rec : crop.records) {
          rec.id = next_ann++;
          rec.image_id = entry.id;
          out.annotations.push_back(rec);
        }
        if (sink) sink(entry, crop);
        out.images.push_back(std::move(entry));
      }
    }
  }
  return out;
}

}  // namespace herdsynth
