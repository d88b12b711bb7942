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

#include "herdsynth/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "herdsynth/error.h"

namespace herdsynth {

using nlohmann::json;

std::optional<double> AveragePrecision(const std::vector<Detection>& dets,
                                       const std::vector<GroundTruthBox>& gts, double iou_thresh) {
  if (gts.empty()) return std::nullopt;
  std::map<std::int64_t, std::vector<std::size_t>> gt_by_image;
  for (std::size_t g = 0; g < gts.size(); ++g) gt_by_image[gts[g].image_id].push_back(g);

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  std::vector<char> used(gts.size(), 0);
  std::vector<double> recall;
  std::vector<double> precision;
  recall.reserve(dets.size());
  precision.reserve(dets.size());
  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Detection& d = dets[order[rank]];
    std::size_t best = gts.size();
    double best_iou = -1.0;
    const auto it = gt_by_image.find(d.image_id);
    if (it != gt_by_image.end()) {
      for (std::size_t g : it->second) {
        if (used[g]) continue;
        const double iou = Iou(d.bbox, gts[g].bbox);
        if (iou >= iou_thresh && iou > best_iou) {
          best_iou = iou;
          best = g;
        }
      }
    }
    if (best < gts.size()) {
      used[best] = 1;
      ++tp;
    }
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gts.size()));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
  }
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    const auto pos = std::lower_bound(recall.begin(), recall.end(), r);
    if (pos != recall.end()) sum += precision[static_cast<std::size_t>(pos - recall.begin())];
  }
  return sum / 101.0;
}

std::vector<double> CocoIouThresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

MeanAp MeanAveragePrecision(const std::vector<Detection>& dets,
                            const std::vector<GroundTruthBox>& gts) {
  std::set<int> classes;
  for (const GroundTruthBox& g : gts) classes.insert(g.category_id);
  const std::vector<double> thresholds = CocoIouThresholds();
  double sum50 = 0.0;
  double sum = 0.0;
  for (int c : classes) {
    std::vector<Detection> cd;
    std::vector<GroundTruthBox> cg;
    for (const Detection& d : dets) {
      if (d.category_id == c) cd.push_back(d);
    }
    for (const GroundTruthBox& g : gts) {
      if (g.category_id == c) cg.push_back(g);
    }
    double class_sum = 0.0;
    for (double t : thresholds) {
      const double ap = *AveragePrecision(cd, cg, t);
      if (t == thresholds.front()) sum50 += ap;
      class_sum += ap;
    }
    sum += class_sum / static_cast<double>(thresholds.size());
  }
  MeanAp out;
  if (!classes.empty()) {
    out.map50 = sum50 / static_cast<double>(classes.size());
    out.map = sum / static_cast<double>(classes.size());
  }
  return out;
}

std::optional<double> PckCount::Value() const {
  if (evaluated == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(evaluated);
}

PckCount& PckCount::operator+=(const PckCount& o) {
  correct += o.correct;
  evaluated += o.evaluated;
  return *this;
}

PckCount Pck(const std::vector<Keypoint>& pred, const AnnotationRecord& gt, double alpha,
             const std::vector<bool>& eval_mask, bool visible_only) {
  HERDSYNTH_ENFORCE(alpha > 0.0, ErrorCode::kEvaluation, "alpha must be positive");
  HERDSYNTH_ENFORCE(pred.size() == gt.keypoints.size(), ErrorCode::kEvaluation,
                    "prediction has " + std::to_string(pred.size()) + " keypoints, ground truth " +
                        std::to_string(gt.keypoints.size()));
  HERDSYNTH_ENFORCE(eval_mask.empty() || eval_mask.size() == gt.keypoints.size(),
                    ErrorCode::kEvaluation, "evaluation mask does not match the schema");
  const double thresh = alpha * gt.bbox.max_dim();
  PckCount out;
  for (std::size_t k = 0; k < gt.keypoints.size(); ++k) {
    const Keypoint& g = gt.keypoints[k];
    if (g.visibility < (visible_only ? 2 : 1)) continue;
    if (!eval_mask.empty() && !eval_mask[k]) continue;
    ++out.evaluated;
    if (std::hypot(pred[k].u - g.u, pred[k].v - g.v) <= thresh) ++out.correct;
  }
  return out;
}

PckCount DatasetPck(const std::map<std::int64_t, std::vector<Keypoint>>& predictions,
                    const DatasetManifest& gt, double alpha, const std::vector<bool>& eval_mask,
                    bool visible_only) {
  PckCount total;
  for (const AnnotationRecord& rec : gt.annotations) {
    const auto it = predictions.find(rec.id);
    if (it != predictions.end()) {
      total += Pck(it->second, rec, alpha, eval_mask, visible_only);
    } else {
      // Missing predictions score zero: evaluate against an impossible point.
      std::vector<Keypoint> none(rec.keypoints.size(),
                                 Keypoint{std::numeric_limits<double>::infinity(), 0.0, 0});
      total += Pck(none, rec, alpha, eval_mask, visible_only);
    }
  }
  return total;
}

// --- aggregation and reports ------------------------------------------------

EvalReport Aggregate(const std::vector<DatasetScores>& per_dataset,
                     std::vector<std::string> metric_order) {
  HERDSYNTH_ENFORCE(!per_dataset.empty(), ErrorCode::kAggregation, "nothing to aggregate");
  EvalReport report;
  report.datasets = per_dataset;
  std::set<std::string> known(metric_order.begin(), metric_order.end());
  for (const DatasetScores& d : per_dataset) {
    HERDSYNTH_ENFORCE(d.n_images > 0, ErrorCode::kAggregation,
                      "dataset '" + d.name + "' has no images");
    for (const auto& [metric, value] : d.values) {
      if (value) {
        HERDSYNTH_ENFORCE(*value >= 0.0 && *value <= 1.0, ErrorCode::kAggregation,
                          "metric " + metric + " of '" + d.name + "' lies outside [0, 1]");
      }
      if (known.insert(metric).second) metric_order.push_back(metric);
    }
  }
  report.metrics = metric_order;
  for (const std::string& m : metric_order) {
    double sum = 0.0;
    double wsum = 0.0;
    double weight = 0.0;
    int count = 0;
    for (const DatasetScores& d : per_dataset) {
      const auto it = d.values.find(m);
      if (it == d.values.end() || !it->second) continue;
      sum += *it->second;
      wsum += *it->second * static_cast<double>(d.n_images);
      weight += static_cast<double>(d.n_images);
      ++count;
    }
    report.average[m] = count ? std::optional<double>(sum / count) : std::nullopt;
    report.weighted_average[m] = count ? std::optional<double>(wsum / weight) : std::nullopt;
  }
  return report;
}

namespace {

json OptJson(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json ValuesJson(const std::map<std::string, std::optional<double>>& values) {
  json j = json::object();
  for (const auto& [k, v] : values) j[k] = OptJson(v);
  return j;
}

std::string Cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", *v);
  return buf;
}

}  // namespace

std::string ReportToJson(const EvalReport& report) {
  json datasets = json::array();
  for (const DatasetScores& d : report.datasets) {
    datasets.push_back({{"name", d.name}, {"n_images", d.n_images}, {"values", ValuesJson(d.values)}});
  }
  const json doc{{"metrics", report.metrics},
                 {"datasets", datasets},
                 {"average", ValuesJson(report.average)},
                 {"weighted_average", ValuesJson(report.weighted_average)}};
  return doc.dump(2) + "\n";
}

std::string ReportToTable(const EvalReport& report) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Dataset", "Images"};
  header.insert(header.end(), report.metrics.begin(), report.metrics.end());
  rows.push_back(header);
  std::int64_t total = 0;
  auto lookup = [](const std::map<std::string, std::optional<double>>& values,
                   const std::string& m) {
    const auto it = values.find(m);
    return it == values.end() ? std::optional<double>() : it->second;
  };
  for (const DatasetScores& d : report.datasets) {
    std::vector<std::string> row{d.name, std::to_string(d.n_images)};
    for (const std::string& m : report.metrics) row.push_back(Cell(lookup(d.values, m)));
    rows.push_back(row);
    total += d.n_images;
  }
  std::vector<std::string> avg{"Average", "-"};
  std::vector<std::string> wavg{"W. Avg.", std::to_string(total)};
  for (const std::string& m : report.metrics) {
    avg.push_back(Cell(lookup(report.average, m)));
    wavg.push_back(Cell(lookup(report.weighted_average, m)));
  }
  rows.push_back(avg);
  rows.push_back(wavg);

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        out << row[c] << std::string(width[c] - row[c].size(), ' ');
      } else {
        out << "  " << std::string(width[c] - row[c].size(), ' ') << row[c];
      }
    }
    out << "\n";
  }
  return out.str();
}

// --- results files ----------------------------------------------------------

namespace {

json ParseResults(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "results: at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  HERDSYNTH_ENFORCE(doc.is_array(), ErrorCode::kParse, "results: expected a top-level array");
  return doc;
}

template <typename Fn>
auto Guard(std::size_t i, Fn fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, "results: at /" + std::to_string(i) + ": " + e.what());
  }
}

}  // namespace

std::vector<Detection> DetectionsFromJson(const std::string& text) {
  const json doc = ParseResults(text);
  std::vector<Detection> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    out.push_back(Guard(i, [&] {
      const json& j = doc[i];
      const auto b = j.at("bbox").get<std::vector<double>>();
      HERDSYNTH_ENFORCE(b.size() == 4, ErrorCode::kParse,
                        "results: at /" + std::to_string(i) + "/bbox: expected 4 values");
      Detection d;
      d.image_id = j.at("image_id").get<std::int64_t>();
      d.bbox = {b[0], b[1], b[2], b[3]};
      d.score = j.at("score").get<double>();
      d.category_id = j.value("category_id", 1);
      return d;
    }));
  }
  return out;
}

std::string DetectionsToJson(const std::vector<Detection>& dets) {
  json doc = json::array();
  for (const Detection& d : dets) {
    doc.push_back({{"image_id", d.image_id},
                   {"category_id", d.category_id},
                   {"bbox", {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h}},
                   {"score", d.score}});
  }
  return doc.dump(2) + "\n";
}

std::vector<KeypointPrediction> KeypointPredictionsFromJson(const std::string& text) {
  const json doc = ParseResults(text);
  std::vector<KeypointPrediction> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    out.push_back(Guard(i, [&] {
      const json& j = doc[i];
      const auto flat = j.at("keypoints").get<std::vector<double>>();
      HERDSYNTH_ENFORCE(flat.size() % 3 == 0, ErrorCode::kParse,
                        "results: at /" + std::to_string(i) + "/keypoints: length not a multiple of 3");
      KeypointPrediction p;
      p.image_id = j.at("image_id").get<std::int64_t>();
      if (j.contains("id")) p.annotation_id = j.at("id").get<std::int64_t>();
      p.category_id = j.value("category_id", 1);
      p.score = j.value("score", 1.0);
      for (std::size_t k = 0; k < flat.size(); k += 3) {
        p.keypoints.push_back({flat[k], flat[k + 1], flat[k + 2] > 0.0 ? 2 : 0});
      }
      return p;
    }));
  }
  return out;
}

std::string KeypointPredictionsToJson(const std::vector<KeypointPrediction>& preds) {
  json doc = json::array();
  for (const KeypointPrediction& p : preds) {
    json flat = json::array();
    for (const Keypoint& k : p.keypoints) {
      flat.push_back(k.u);
      flat.push_back(k.v);
      flat.push_back(k.visibility);
    }
    json j{{"image_id", p.image_id},
           {"category_id", p.category_id},
           {"keypoints", flat},
           {"score", p.score}};
    if (p.annotation_id) j["id"] = *p.annotation_id;
    doc.push_back(j);
  }
  return doc.dump(2) + "\n";
}

std::vector<GroundTruthBox> GroundTruthBoxes(const DatasetManifest& manifest) {
  std::vector<GroundTruthBox> out;
  out.reserve(manifest.annotations.size());
  for (const AnnotationRecord& rec : manifest.annotations) {
    out.push_back({rec.image_id, rec.bbox, rec.category_id});
  }
  return out;
}

std::map<std::int64_t, std::vector<Keypoint>> AssignKeypointPredictions(
    const std::vector<KeypointPrediction>& preds, const DatasetManifest& gt) {
  std::map<std::int64_t, const AnnotationRecord*> by_id;
  std::map<std::int64_t, std::vector<const AnnotationRecord*>> by_image;
  for (const AnnotationRecord& rec : gt.annotations) {
    by_id[rec.id] = &rec;
    by_image[rec.image_id].push_back(&rec);
  }
  std::map<std::int64_t, std::vector<Keypoint>> out;
  for (const KeypointPrediction& p : preds) {
    if (p.annotation_id) {
      HERDSYNTH_ENFORCE(by_id.count(*p.annotation_id) > 0, ErrorCode::kEvaluation,
                        "prediction references unknown annotation " +
                            std::to_string(*p.annotation_id));
      out[*p.annotation_id] = p.keypoints;
      continue;
    }
    const AnnotationRecord* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const AnnotationRecord* rec : by_image[p.image_id]) {
      if (out.count(rec->id) || rec->keypoints.size() != p.keypoints.size()) continue;
      double sum = 0.0;
      int n = 0;
      for (std::size_t k = 0; k < rec->keypoints.size(); ++k) {
        if (rec->keypoints[k].visibility == 0) continue;
        sum += std::hypot(p.keypoints[k].u - rec->keypoints[k].u,
                          p.keypoints[k].v - rec->keypoints[k].v);
        ++n;
      }
      const double d = n ? sum / n : std::numeric_limits<double>::max();
      if (d < best_dist) {
        best_dist = d;
        best = rec;
      }
    }
    if (best != nullptr) out[best->id] = p.keypoints;
  }
  return out;
}

}  // namespace herdsynth
