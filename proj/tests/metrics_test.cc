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
#include <nlohmann/json.hpp>

#include "herdsynth/error.h"
#include "herdsynth/metrics.h"
#include "oracles.h"

namespace herdsynth {
namespace {

using testing::BruteForceAp;
using testing::RandomApFixture;
using testing::RandomPckFixture;
using testing::TallyPck;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

const GroundTruthBox kGt{1, {0, 0, 100, 100}, 1};

TEST(ApTest, SinglePairExamples) {
  // IoU of {0,0,100,100} and {0,0,100,60} is 0.6.
  const Detection det{1, {0, 0, 100, 60}, 0.9, 1};
  EXPECT_DOUBLE_EQ(*AveragePrecision({det}, {kGt}, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(*AveragePrecision({det}, {kGt}, 0.75), 0.0);
  EXPECT_DOUBLE_EQ(*AveragePrecision({}, {kGt}, 0.5), 0.0);
  EXPECT_FALSE(AveragePrecision({det}, {}, 0.5).has_value());
}

TEST(ApTest, PartialRecallAndFalsePositives) {
  const GroundTruthBox other{1, {200, 200, 50, 50}, 1};
  // Recall stops at 0.5 with precision 1: recall levels 0.00..0.50 score.
  EXPECT_NEAR(*AveragePrecision({{1, {0, 0, 100, 100}, 0.9, 1}}, {kGt, other}, 0.5), 51.0 / 101.0,
              1e-12);
  // A higher-ranked false positive halves the precision at full recall.
  const std::vector<Detection> dets{{1, {400, 400, 10, 10}, 0.9, 1}, {1, {0, 0, 100, 100}, 0.8, 1}};
  EXPECT_NEAR(*AveragePrecision(dets, {kGt}, 0.5), 0.5, 1e-12);
  // A detection in another image cannot match.
  EXPECT_DOUBLE_EQ(*AveragePrecision({{2, {0, 0, 100, 100}, 0.9, 1}}, {kGt}, 0.5), 0.0);
}

TEST(ApTest, EqualIouGoesToEarlierGroundTruth) {
  // Two identical GT boxes; the single detection covers both equally.
  const std::vector<GroundTruthBox> gts{kGt, kGt};
  const std::vector<Detection> dets{{1, {0, 0, 100, 100}, 0.9, 1}, {1, {0, 0, 100, 100}, 0.9, 1}};
  EXPECT_DOUBLE_EQ(*AveragePrecision(dets, gts, 0.5), 1.0);
}

TEST(ApTest, MatchesBruteForceOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto f = RandomApFixture(rng);
    for (double t : {0.3, 0.5, 0.75}) {
      ASSERT_NEAR(*AveragePrecision(f.dets, f.gts, t), BruteForceAp(f.dets, f.gts, t), 1e-9)
          << "trial " << trial << " thresh " << t;
    }
  }
}

TEST(ApTest, MonotoneInThreshold) {
  Rng rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const auto f = RandomApFixture(rng);
    double prev = 2.0;
    for (double t : CocoIouThresholds()) {
      const double ap = *AveragePrecision(f.dets, f.gts, t);
      EXPECT_LE(ap, prev + 1e-12);
      EXPECT_GE(ap, 0.0);
      EXPECT_LE(ap, 1.0);
      prev = ap;
    }
  }
}

TEST(ApTest, ScoreScalingInvariant) {
  Rng rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    auto f = RandomApFixture(rng);
    const double before = *AveragePrecision(f.dets, f.gts, 0.5);
    const double s = UniformReal(rng, 0.01, 100.0);
    for (Detection& d : f.dets) d.score *= s;
    EXPECT_DOUBLE_EQ(*AveragePrecision(f.dets, f.gts, 0.5), before);
  }
}

TEST(MeanApTest, Examples) {
  const std::vector<double> t = CocoIouThresholds();
  ASSERT_EQ(t.size(), 10u);
  EXPECT_DOUBLE_EQ(t.front(), 0.5);
  EXPECT_DOUBLE_EQ(t.back(), 0.95);

  MeanAp perfect = MeanAveragePrecision({{1, kGt.bbox, 1.0, 1}}, {kGt});
  EXPECT_DOUBLE_EQ(*perfect.map50, 1.0);
  EXPECT_DOUBLE_EQ(*perfect.map, 1.0);

  // IoU 0.72 matches at 0.50, 0.55, 0.60, 0.65, 0.70.
  MeanAp partial = MeanAveragePrecision({{1, {0, 0, 100, 72}, 1.0, 1}}, {kGt});
  EXPECT_DOUBLE_EQ(*partial.map50, 1.0);
  EXPECT_NEAR(*partial.map, 0.5, 1e-12);

  MeanAp none = MeanAveragePrecision({}, {kGt});
  EXPECT_DOUBLE_EQ(*none.map50, 0.0);
  EXPECT_DOUBLE_EQ(*none.map, 0.0);

  MeanAp absent = MeanAveragePrecision({{1, kGt.bbox, 1.0, 1}}, {});
  EXPECT_FALSE(absent.map50.has_value());
  EXPECT_FALSE(absent.map.has_value());
}

TEST(MeanApTest, AveragesOverCategories) {
  const GroundTruthBox cat2{1, {200, 200, 50, 50}, 2};
  const MeanAp m = MeanAveragePrecision({{1, kGt.bbox, 1.0, 1}}, {kGt, cat2});
  EXPECT_DOUBLE_EQ(*m.map50, 0.5);
}

AnnotationRecord PckRecord() {
  AnnotationRecord rec;
  rec.id = 1;
  rec.image_id = 1;
  rec.schema = SchemaTag::kQuadruped17;
  rec.bbox = {10, 20, 100, 200};
  rec.keypoints.assign(17, Keypoint{50, 60, 2});
  return rec;
}

TEST(PckTest, ThresholdBoundary) {
  const AnnotationRecord gt = PckRecord();
  std::vector<Keypoint> pred = gt.keypoints;
  pred[0].u += 9.9;
  pred[1].v += 10.1;
  pred[2].u += 6.0;
  pred[2].v += 8.0;  // exactly 10
  const PckCount c = Pck(pred, gt, 0.05);
  EXPECT_EQ(c.evaluated, 17);
  EXPECT_EQ(c.correct, 16);
  EXPECT_EQ(Pck(pred, gt, 0.1).correct, 17);
}

TEST(PckTest, VisibilityAndMasks) {
  AnnotationRecord gt = PckRecord();
  EXPECT_EQ(Pck(gt.keypoints, gt, 1e-6).correct, 17);
  gt.keypoints[0].visibility = 1;
  gt.keypoints[1].visibility = 0;
  EXPECT_EQ(Pck(gt.keypoints, gt, 0.05).evaluated, 16);
  EXPECT_EQ(Pck(gt.keypoints, gt, 0.05, {}, true).evaluated, 15);
  std::vector<bool> mask(17, true);
  mask[5] = false;
  EXPECT_EQ(Pck(gt.keypoints, gt, 0.05, mask).evaluated, 15);
  for (Keypoint& k : gt.keypoints) k.visibility = 0;
  const PckCount empty = Pck(gt.keypoints, gt, 0.05);
  EXPECT_EQ(empty.evaluated, 0);
  EXPECT_FALSE(empty.Value().has_value());
}

TEST(PckTest, Errors) {
  const AnnotationRecord gt = PckRecord();
  EXPECT_EQ(CodeOf([&] { Pck(gt.keypoints, gt, 0.0); }), ErrorCode::kEvaluation);
  EXPECT_EQ(CodeOf([&] { Pck(std::vector<Keypoint>(27), gt, 0.05); }), ErrorCode::kEvaluation);
  EXPECT_EQ(CodeOf([&] { Pck(gt.keypoints, gt, 0.05, std::vector<bool>(27, true)); }),
            ErrorCode::kEvaluation);
}

TEST(PckTest, TranslationAndScaleInvariance) {
  Rng rng(14);
  for (int trial = 0; trial < 300; ++trial) {
    auto f = RandomPckFixture(rng);
    if (f.gt.annotations.empty()) continue;
    const AnnotationRecord& gt = f.gt.annotations.front();
    const auto it = f.preds.find(gt.id);
    if (it == f.preds.end()) continue;
    const PckCount base = Pck(it->second, gt, 0.1);

    // Integer shifts and power-of-two scales keep the arithmetic exact.
    const double dx = static_cast<double>(UniformInt(rng, -64, 64));
    const double dy = static_cast<double>(UniformInt(rng, -64, 64));
    const double s = std::ldexp(1.0, static_cast<int>(UniformInt(rng, -2, 3)));
    AnnotationRecord moved = gt, scaled = gt;
    std::vector<Keypoint> moved_pred = it->second, scaled_pred = it->second;
    moved.bbox.x += dx;
    moved.bbox.y += dy;
    scaled.bbox = {gt.bbox.x * s, gt.bbox.y * s, gt.bbox.w * s, gt.bbox.h * s};
    for (std::size_t k = 0; k < gt.keypoints.size(); ++k) {
      moved.keypoints[k].u += dx;
      moved.keypoints[k].v += dy;
      moved_pred[k].u += dx;
      moved_pred[k].v += dy;
      scaled.keypoints[k].u *= s;
      scaled.keypoints[k].v *= s;
      scaled_pred[k].u *= s;
      scaled_pred[k].v *= s;
    }
    const PckCount m = Pck(moved_pred, moved, 0.1);
    const PckCount sc = Pck(scaled_pred, scaled, 0.1);
    EXPECT_EQ(m.evaluated, base.evaluated);
    EXPECT_EQ(sc.evaluated, base.evaluated);
    EXPECT_EQ(m.correct, base.correct);
    EXPECT_EQ(sc.correct, base.correct);
  }
}

TEST(PckTest, DatasetMatchesTallyOracle) {
  Rng rng(15);
  for (int trial = 0; trial < 300; ++trial) {
    const auto f = RandomPckFixture(rng);
    for (double alpha : {0.05, 0.1}) {
      const PckCount lib = DatasetPck(f.preds, f.gt, alpha);
      const PckCount ref = TallyPck(f.preds, f.gt, alpha);
      ASSERT_EQ(lib.correct, ref.correct);
      ASSERT_EQ(lib.evaluated, ref.evaluated);
    }
  }
}

TEST(PckTest, FilteredPresetDropsFiveSlots) {
  const std::vector<bool> mask = EvalMaskFiltered(SchemaTag::kZebra27);
  EXPECT_EQ(std::count(mask.begin(), mask.end(), false), 5);
  EXPECT_FALSE(mask[kTailStart]);
  EXPECT_FALSE(mask[kThighLF]);
  EXPECT_FALSE(mask[kThighRB]);
}

DatasetScores Scores(const std::string& name, std::int64_t n, std::optional<double> v) {
  return {name, n, {{"mAP50", v}}};
}

TEST(AggregateTest, FourDatasetExample) {
  const EvalReport r = Aggregate({Scores("a", 1200, 0.150), Scores("b", 200, 0.076),
                                  Scores("c", 185, 0.331), Scores("d", 104000, 0.911)});
  EXPECT_NEAR(*r.average.at("mAP50"), 0.367, 0.001);
  EXPECT_NEAR(*r.weighted_average.at("mAP50"), 0.899, 0.001);
}

TEST(AggregateTest, TrivialCases) {
  EvalReport one = Aggregate({Scores("a", 7, 0.42)});
  EXPECT_DOUBLE_EQ(*one.average.at("mAP50"), 0.42);
  EXPECT_DOUBLE_EQ(*one.weighted_average.at("mAP50"), 0.42);
  Rng rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<DatasetScores> ds;
    const std::int64_t n = UniformInt(rng, 1, 1000);
    for (int i = 0; i < UniformInt(rng, 1, 6); ++i) ds.push_back(Scores("d", n, UniformReal(rng, 0, 1)));
    const EvalReport r = Aggregate(ds);
    EXPECT_NEAR(*r.average.at("mAP50"), *r.weighted_average.at("mAP50"), 1e-12);
  }
}

TEST(AggregateTest, AbsentValuesAreSkipped) {
  const EvalReport r = Aggregate({Scores("a", 10, 0.5), Scores("b", 30, std::nullopt)});
  EXPECT_DOUBLE_EQ(*r.average.at("mAP50"), 0.5);
  EXPECT_DOUBLE_EQ(*r.weighted_average.at("mAP50"), 0.5);
  const EvalReport all_absent = Aggregate({Scores("a", 10, std::nullopt)});
  EXPECT_FALSE(all_absent.average.at("mAP50").has_value());
}

TEST(AggregateTest, Errors) {
  EXPECT_EQ(CodeOf([] { Aggregate({}); }), ErrorCode::kAggregation);
  EXPECT_EQ(CodeOf([] { Aggregate({Scores("a", 0, 0.5)}); }), ErrorCode::kAggregation);
  EXPECT_EQ(CodeOf([] { Aggregate({Scores("a", 3, 1.5)}); }), ErrorCode::kAggregation);
}

TEST(ReportTest, JsonAndTable) {
  const EvalReport r = Aggregate({{"SC", 10, {{"mAP50", 0.5}, {"mAP", std::nullopt}}},
                                  {"Val", 30, {{"mAP50", 0.25}, {"mAP", 0.125}}}},
                                 {"mAP50", "mAP"});
  const auto doc = nlohmann::json::parse(ReportToJson(r));
  EXPECT_EQ(doc["metrics"], (nlohmann::json{"mAP50", "mAP"}));
  EXPECT_TRUE(doc["datasets"][0]["values"]["mAP"].is_null());
  EXPECT_DOUBLE_EQ(doc["weighted_average"]["mAP50"].get<double>(), 0.3125);

  const std::string table = ReportToTable(r);
  EXPECT_NE(table.find("0.500"), std::string::npos);
  EXPECT_NE(table.find("-"), std::string::npos);
  EXPECT_NE(table.find("Average"), std::string::npos);
  EXPECT_NE(table.find("W. Avg."), std::string::npos);
  std::istringstream lines(table);
  std::string line;
  std::size_t width = 0;
  while (std::getline(lines, line)) {
    if (line.empty() || line.find_first_not_of('-') == std::string::npos) continue;
    if (width == 0) width = line.size();
    EXPECT_EQ(line.size(), width) << line;
  }
}

TEST(ResultsJsonTest, RoundTrips) {
  const std::vector<Detection> dets{{3, {1.5, 2, 30, 40}, 0.75, 1}};
  const auto back = DetectionsFromJson(DetectionsToJson(dets));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].bbox, dets[0].bbox);
  EXPECT_EQ(back[0].image_id, 3);
  EXPECT_DOUBLE_EQ(back[0].score, 0.75);

  KeypointPrediction p;
  p.image_id = 2;
  p.annotation_id = 9;
  p.keypoints = {{1, 2, 2}, {0, 0, 0}};
  const auto kp = KeypointPredictionsFromJson(KeypointPredictionsToJson({p}));
  ASSERT_EQ(kp.size(), 1u);
  EXPECT_EQ(kp[0].annotation_id, 9);
  EXPECT_EQ(kp[0].keypoints, p.keypoints);
  EXPECT_EQ(CodeOf([] { DetectionsFromJson("[{\"image_id\": 1}]"); }), ErrorCode::kParse);
}

TEST(AssignTest, ByIdThenNearest) {
  DatasetManifest gt;
  gt.schema = SchemaTag::kQuadruped17;
  gt.images.push_back({1, "a.png", 640, 480});
  AnnotationRecord a = PckRecord(), b = PckRecord();
  b.id = 2;
  for (Keypoint& k : b.keypoints) k.u += 200;
  gt.annotations = {a, b};
  KeypointPrediction near_b;
  near_b.image_id = 1;
  near_b.keypoints = b.keypoints;
  KeypointPrediction by_id;
  by_id.image_id = 1;
  by_id.annotation_id = 1;
  by_id.keypoints = a.keypoints;
  const auto assigned = AssignKeypointPredictions({near_b, by_id}, gt);
  ASSERT_EQ(assigned.size(), 2u);
  EXPECT_EQ(assigned.at(2), b.keypoints);
  EXPECT_EQ(assigned.at(1), a.keypoints);
  KeypointPrediction bad = by_id;
  bad.annotation_id = 99;
  EXPECT_EQ(CodeOf([&] { AssignKeypointPredictions({bad}, gt); }), ErrorCode::kEvaluation);
}

}  // namespace
}  // namespace herdsynth
