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

#include "herdsynth/error.h"

namespace herdsynth {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBehindCamera: return "behind_camera";
    case ErrorCode::kMissingInstance: return "missing_instance";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kConfiguration: return "configuration";
    case ErrorCode::kEmptyScene: return "empty_scene";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kConsistency: return "consistency";
    case ErrorCode::kMapping: return "mapping";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kDanglingReference: return "dangling_reference";
    case ErrorCode::kConversion: return "conversion";
    case ErrorCode::kMerge: return "merge";
    case ErrorCode::kEvaluation: return "evaluation";
    case ErrorCode::kAggregation: return "aggregation";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace herdsynth
