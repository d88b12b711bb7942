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

#include "herdsynth/keypoint_schema.h"

namespace herdsynth {

int SchemaSize(SchemaTag tag) {
  switch (tag) {
    case SchemaTag::kNone: return 0;
    case SchemaTag::kQuadruped17: return kNumQuadrupedKeypoints;
    case SchemaTag::kZebra27: return kNumZebraKeypoints;
  }
  return 0;
}

std::string_view SchemaName(SchemaTag tag) {
  switch (tag) {
    case SchemaTag::kNone: return "none";
    case SchemaTag::kQuadruped17: return "quadruped17";
    case SchemaTag::kZebra27: return "zebra27";
  }
  return "none";
}

std::optional<SchemaTag> SchemaFromName(std::string_view name) {
  if (name == "none") return SchemaTag::kNone;
  if (name == "quadruped17") return SchemaTag::kQuadruped17;
  if (name == "zebra27") return SchemaTag::kZebra27;
  return std::nullopt;
}

std::vector<std::string> SchemaKeypointNames(SchemaTag tag) {
  switch (tag) {
    case SchemaTag::kNone: return {};
    case SchemaTag::kQuadruped17: return {kQuadruped17Names.begin(), kQuadruped17Names.end()};
    case SchemaTag::kZebra27: return {kZebra27Names.begin(), kZebra27Names.end()};
  }
  return {};
}

std::vector<std::pair<int, int>> SchemaFlipPairs(SchemaTag tag) {
  switch (tag) {
    case SchemaTag::kNone: return {};
    case SchemaTag::kQuadruped17:
      return {kQuadruped17FlipPairs.begin(), kQuadruped17FlipPairs.end()};
    case SchemaTag::kZebra27: return {kZebra27FlipPairs.begin(), kZebra27FlipPairs.end()};
  }
  return {};
}

int FlipPartner(SchemaTag tag, int slot) {
  for (const auto& [a, b] : SchemaFlipPairs(tag)) {
    if (slot == a) return b;
    if (slot == b) return a;
  }
  return slot;
}

std::vector<bool> EvalMaskAll(SchemaTag tag) {
  return std::vector<bool>(static_cast<std::size_t>(SchemaSize(tag)), true);
}

std::vector<bool> EvalMaskFiltered(SchemaTag tag) {
  std::vector<bool> mask = EvalMaskAll(tag);
  if (tag == SchemaTag::kZebra27) {
    for (int slot : {kThighLF, kThighRF, kThighRB, kThighLB, kTailStart}) {
      mask[static_cast<std::size_t>(slot)] = false;
    }
  } else if (tag == SchemaTag::kQuadruped17) {
    // root_of_tail, shoulders and hips: the counterparts of tail_start and
    // the thighs under the default 17 -> 27 table.
    for (int slot : {4, 5, 8, 11, 14}) mask[static_cast<std::size_t>(slot)] = false;
  }
  return mask;
}

}  // namespace herdsynth
