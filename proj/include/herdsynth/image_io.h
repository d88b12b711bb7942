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

// On-disk formats for rendered frames:
//   masks  - single-channel 16-bit PNG, one instance id per pixel
//   depth  - {width:u32, height:u32} little-endian header followed by
//            width*height little-endian float32 values, row-major
//   images - 8-bit grayscale or RGB PNG

#ifndef HERDSYNTH_IMAGE_IO_H_
#define HERDSYNTH_IMAGE_IO_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "herdsynth/geometry.h"

namespace herdsynth {

// Interleaved 8-bit image.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool operator==(const Image&) const = default;
};

void WriteMaskPng(const InstanceMask& mask, const std::filesystem::path& path);
InstanceMask ReadMaskPng(const std::filesystem::path& path);

void WriteImagePng(const Image& image, const std::filesystem::path& path);
Image ReadImagePng(const std::filesystem::path& path);

void WriteDepthGrid(int width, int height, const std::vector<float>& depth,
                    const std::filesystem::path& path);
std::vector<float> ReadDepthGrid(const std::filesystem::path& path, int* width, int* height);

}  // namespace herdsynth

#endif  // HERDSYNTH_IMAGE_IO_H_
