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

// Detection AP (101-point interpolation, greedy score-order matching), pose
// PCK@alpha, and plain / image-weighted aggregation across datasets.

#ifndef HERDSYNTH_METRICS_H_
#define HERDSYNTH_METRICS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "herdsynth/datasets.h"
#include "herdsynth/geometry.h"
#include "herdsynth/keypoints.h"

namespace herdsynth {

struct Detection {
  std::int64_t image_id = 0;
  PixelBox bbox;
  double score = 1.0;
  int category_id = 1;
};

struct GroundTruthBox {
  std::int64_t image_id = 0;
  PixelBox bbox;
  int category_id = 1;
};

// Class-agnostic AP at one IoU threshold. Detections are ranked by score
// (stable, so ties keep input order); each takes the highest-IoU unmatched
// ground truth in its image with IoU >= iou_thresh, ties to the earlier GT.
// Returns nullopt when there is no ground truth.
std::optional<double> AveragePrecision(const std::vector<Detection>& dets,
                                       const std::vector<GroundTruthBox>& gts, double iou_thresh);

// Thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> CocoIouThresholds();

struct MeanAp {
  std::optional<double> map50;
  std::optional<double> map;  // mean over CocoIouThresholds()
};

// Per category AP, averaged over categories that have ground truth.
MeanAp MeanAveragePrecision(const std::vector<Detection>& dets,
                            const std::vector<GroundTruthBox>& gts);

struct PckCount {
  std::int64_t correct = 0;
  std::int64_t evaluated = 0;

  std::optional<double> Value() const;
  PckCount& operator+=(const PckCount& o);
};

// Over gt keypoints with visibility > 0 (== 2 with visible_only) whose slot
// is in `eval_mask` (empty = all): correct when the distance to the
// prediction is <= alpha * max(bbox.w, bbox.h). Throws kEvaluation on a
// slot-count mismatch or alpha <= 0.
PckCount Pck(const std::vector<Keypoint>& pred, const AnnotationRecord& gt, double alpha,
             const std::vector<bool>& eval_mask = {}, bool visible_only = false);

// Sums Pck over ground-truth annotations. Predictions are matched by
// annotation id; annotations without a prediction count every evaluated
// keypoint as incorrect.
PckCount DatasetPck(const std::map<std::int64_t, std::vector<Keypoint>>& predictions,
                    const DatasetManifest& gt, double alpha, const std::vector<bool>& eval_mask = {},
                    bool visible_only = false);

struct DatasetScores {
  std::string name;
  std::int64_t n_images = 0;
  std::map<std::string, std::optional<double>> values;
};

struct EvalReport {
  std::vector<std::string> metrics;  // column order
  std::vector<DatasetScores> datasets;
  std::map<std::string, std::optional<double>> average;
  std::map<std::string, std::optional<double>> weighted_average;
};

// Plain mean and image-count-weighted mean of every metric over the datasets
// where it is present. Throws kAggregation on empty input or n_images <= 0.
EvalReport Aggregate(const std::vector<DatasetScores>& per_dataset,
                     std::vector<std::string> metric_order = {});

std::string ReportToJson(const EvalReport& report);
// Aligned columns, three decimals, "-" for absent values, with trailing
// "Average" and "W. Avg." rows.
std::string ReportToTable(const EvalReport& report);

// COCO results files: [{"image_id", "category_id", "bbox", "score"}, ...] and
// [{"image_id", "category_id", "keypoints", "score", "id"?}, ...].
std::vector<Detection> DetectionsFromJson(const std::string& text);
std::string DetectionsToJson(const std::vector<Detection>& dets);

struct KeypointPrediction {
  std::int64_t image_id = 0;
  std::optional<std::int64_t> annotation_id;
  int category_id = 1;
  double score = 1.0;
  std::vector<Keypoint> keypoints;
};

std::vector<KeypointPrediction> KeypointPredictionsFromJson(const std::string& text);
std::string KeypointPredictionsToJson(const std::vector<KeypointPrediction>& preds);

// Ground-truth boxes of a manifest.
std::vector<GroundTruthBox> GroundTruthBoxes(const DatasetManifest& manifest);

// Assigns predictions to ground-truth annotations: by annotation_id when
// present, otherwise to the unused annotation in the same image whose
// labeled keypoints are closest on average. Throws kEvaluation on unknown ids.
std::map<std::int64_t, std::vector<Keypoint>> AssignKeypointPredictions(
    const std::vector<KeypointPrediction>& preds, const DatasetManifest& gt);

}  // namespace herdsynth

#endif  // HERDSYNTH_METRICS_H_
