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

#ifndef HERDSYNTH_KEYPOINT_SCHEMA_H_
#define HERDSYNTH_KEYPOINT_SCHEMA_H_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace herdsynth {

enum class SchemaTag {
  kNone,         // detection-only records, no keypoint slots
  kQuadruped17,  // AP-10K / APT-36K ordering
  kZebra27,
};

// Slot indices of the 27-keypoint schema. Vertex group label = slot + 1.
enum Zebra27 : int {
  kHoofLF = 0, kHoofRF, kHoofRB, kHoofLB,
  kKneeLF, kKneeRF, kKneeRB, kKneeLB,
  kThighLF, kThighRF, kThighRB, kThighLB,
  kTailStart, kTailEnd,
  kLeftEye, kRightEye,
  kLeftEarTip, kRightEarTip,
  kLeftEarBase, kRightEarBase,
  kNeckStart, kNeckEnd,
  kNose, kSkull, kBodyMiddle, kBackEnd, kBackFront,
};

inline constexpr int kNumZebraKeypoints = 27;
inline constexpr int kNumQuadrupedKeypoints = 17;

inline constexpr std::array<std::string_view, kNumZebraKeypoints> kZebra27Names = {
    "hoof_lf",       "hoof_rf",        "hoof_rb",        "hoof_lb",   "knee_lf",
    "knee_rf",       "knee_rb",        "knee_lb",        "thigh_lf",  "thigh_rf",
    "thigh_rb",      "thigh_lb",       "tail_start",     "tail_end",  "left_eye",
    "right_eye",     "left_ear_tip",   "right_ear_tip",  "left_ear_base",
    "right_ear_base", "neck_start",    "neck_end",       "nose",      "skull",
    "body_middle",   "back_end",       "back_front",
};

inline constexpr std::array<std::pair<int, int>, 9> kZebra27FlipPairs = {{
    {kHoofLF, kHoofRF}, {kHoofLB, kHoofRB},
    {kKneeLF, kKneeRF}, {kKneeLB, kKneeRB},
    {kThighLF, kThighRF}, {kThighLB, kThighRB},
    {kLeftEye, kRightEye}, {kLeftEarTip, kRightEarTip}, {kLeftEarBase, kRightEarBase},
}};

inline constexpr std::array<std::string_view, kNumQuadrupedKeypoints> kQuadruped17Names = {
    "left_eye",      "right_eye",  "nose",           "neck",          "root_of_tail",
    "left_shoulder", "left_elbow", "left_front_paw", "right_shoulder", "right_elbow",
    "right_front_paw", "left_hip", "left_knee",      "left_back_paw", "right_hip",
    "right_knee",    "right_back_paw",
};

inline constexpr std::array<std::pair<int, int>, 7> kQuadruped17FlipPairs = {{
    {0, 1}, {5, 8}, {6, 9}, {7, 10}, {11, 14}, {12, 15}, {13, 16},
}};

int SchemaSize(SchemaTag tag);
std::string_view SchemaName(SchemaTag tag);
std::optional<SchemaTag> SchemaFromName(std::string_view name);
std::vector<std::string> SchemaKeypointNames(SchemaTag tag);
std::vector<std::pair<int, int>> SchemaFlipPairs(SchemaTag tag);
// Partner slot under horizontal flip, or the slot itself when unpaired.
int FlipPartner(SchemaTag tag, int slot);

// Slots evaluated by PCK. "all" keeps every slot; "filtered" drops the four
// thighs and tail_start of the 27-keypoint schema, whose synthetic placement
// is offset from where annotators put them (and their 17-schema
// counterparts).
std::vector<bool> EvalMaskAll(SchemaTag tag);
std::vector<bool> EvalMaskFiltered(SchemaTag tag);

}  // namespace herdsynth

#endif  // HERDSYNTH_KEYPOINT_SCHEMA_H_
