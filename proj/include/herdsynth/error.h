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

#ifndef HERDSYNTH_ERROR_H_
#define HERDSYNTH_ERROR_H_

#include <stdexcept>
#include <string>

namespace herdsynth {

enum class ErrorCode {
  kBehindCamera,
  kMissingInstance,
  kInvalidArgument,
  kConfiguration,
  kEmptyScene,
  kSchema,
  kConsistency,
  kMapping,
  kParse,
  kDanglingReference,
  kConversion,
  kMerge,
  kEvaluation,
  kAggregation,
  kIo,
};

const char* ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries a machine-readable code; the
// CLI turns these into structured diagnostics.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

#define HERDSYNTH_ENFORCE(cond, code, msg)        \
  do {                                            \
    if (!(cond)) {                                \
      throw ::herdsynth::Error((code), (msg));    \
    }                                             \
  } while (0)

}  // namespace herdsynth

#endif  // HERDSYNTH_ERROR_H_
