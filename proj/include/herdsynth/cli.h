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

// Command-line front end. RunCli is the whole tool minus process plumbing so
// that tests can drive it in-process.

#ifndef HERDSYNTH_CLI_H_
#define HERDSYNTH_CLI_H_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace herdsynth {

// `args` excludes the program name. Exit codes: 0 success, 1 usage error,
// 2 runtime error (reported as a JSON line on `err`).
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Hex SHA-256 of a file, or of the sorted (relative path, digest) listing of
// a directory.
std::string Sha256Path(const std::filesystem::path& path);

}  // namespace herdsynth

#endif  // HERDSYNTH_CLI_H_
