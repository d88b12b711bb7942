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

#include "herdsynth/image_io.h"

#include <png.h>

#include <bit>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "herdsynth/error.h"

namespace herdsynth {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr OpenFile(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  HERDSYNTH_ENFORCE(f != nullptr, ErrorCode::kIo, "cannot open " + path.string());
  return f;
}

// The libpng calls below are confined to functions holding only trivially
// destructible locals, so the setjmp/longjmp error path never skips a C++
// destructor.
bool WritePngRaw(std::FILE* f, int width, int height, int bit_depth, int color_type,
                 const std::uint8_t* bytes, std::size_t row_bytes) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, bytes + static_cast<std::size_t>(y) * row_bytes);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

void WritePng(const std::filesystem::path& path, int width, int height, int bit_depth,
              int color_type, const std::vector<std::uint8_t>& bytes, std::size_t row_bytes) {
  FilePtr f = OpenFile(path, "wb");
  HERDSYNTH_ENFORCE(
      WritePngRaw(f.get(), width, height, bit_depth, color_type, bytes.data(), row_bytes),
      ErrorCode::kIo, "failed encoding " + path.string());
}

struct PngHeader {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int channels = 0;
};

using RowBuffer = std::vector<std::uint8_t>;

bool ReadPngRaw(std::FILE* f, PngHeader* header, RowBuffer* bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, f);
  png_read_info(png, info);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_bit_depth(png, info) < 8) png_set_packing(png);
  png_read_update_info(png, info);
  header->width = static_cast<int>(png_get_image_width(png, info));
  header->height = static_cast<int>(png_get_image_height(png, info));
  header->bit_depth = png_get_bit_depth(png, info);
  header->channels = png_get_channels(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  bytes->resize(row_bytes * static_cast<std::size_t>(header->height));
  for (int y = 0; y < header->height; ++y) {
    png_read_row(png, bytes->data() + static_cast<std::size_t>(y) * row_bytes, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

struct PngData {
  PngHeader header;
  RowBuffer bytes;
};

PngData ReadPng(const std::filesystem::path& path) {
  FilePtr f = OpenFile(path, "rb");
  PngData out;
  HERDSYNTH_ENFORCE(ReadPngRaw(f.get(), &out.header, &out.bytes), ErrorCode::kIo,
                    "failed decoding " + path.string());
  return out;
}

}  // namespace

void WriteMaskPng(const InstanceMask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(mask.ids().size() * 2);
  for (std::size_t i = 0; i < mask.ids().size(); ++i) {
    bytes[2 * i] = static_cast<std::uint8_t>(mask.ids()[i] >> 8);
    bytes[2 * i + 1] = static_cast<std::uint8_t>(mask.ids()[i] & 0xFF);
  }
  WritePng(path, mask.width(), mask.height(), 16, PNG_COLOR_TYPE_GRAY, bytes,
           static_cast<std::size_t>(mask.width()) * 2);
}

InstanceMask ReadMaskPng(const std::filesystem::path& path) {
  const PngData png = ReadPng(path);
  HERDSYNTH_ENFORCE(png.header.channels == 1 && png.header.bit_depth == 16, ErrorCode::kIo,
                    path.string() + " is not a 16-bit single-channel mask");
  std::vector<InstanceId> ids(static_cast<std::size_t>(png.header.width) * png.header.height);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    ids[i] = static_cast<InstanceId>((png.bytes[2 * i] << 8) | png.bytes[2 * i + 1]);
  }
  return InstanceMask(png.header.width, png.header.height, std::move(ids));
}

void WriteImagePng(const Image& image, const std::filesystem::path& path) {
  HERDSYNTH_ENFORCE(image.channels == 1 || image.channels == 3, ErrorCode::kInvalidArgument,
                    "only grayscale and RGB images can be written");
  WritePng(path, image.width, image.height, 8,
           image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, image.data,
           static_cast<std::size_t>(image.width) * image.channels);
}

Image ReadImagePng(const std::filesystem::path& path) {
  const PngData png = ReadPng(path);
  HERDSYNTH_ENFORCE(png.header.bit_depth == 8, ErrorCode::kIo,
                    path.string() + " is not an 8-bit image");
  return Image{png.header.width, png.header.height, png.header.channels, png.bytes};
}

void WriteDepthGrid(int width, int height, const std::vector<float>& depth,
                    const std::filesystem::path& path) {
  HERDSYNTH_ENFORCE(depth.size() == static_cast<std::size_t>(width) * height,
                    ErrorCode::kInvalidArgument, "depth grid does not match its dimensions");
  std::vector<std::uint8_t> bytes(8 + depth.size() * 4);
  auto put_u32 = [&](std::size_t at, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) bytes[at + b] = static_cast<std::uint8_t>(v >> (8 * b));
  };
  put_u32(0, static_cast<std::uint32_t>(width));
  put_u32(4, static_cast<std::uint32_t>(height));
  for (std::size_t i = 0; i < depth.size(); ++i) {
    put_u32(8 + 4 * i, std::bit_cast<std::uint32_t>(depth[i]));
  }
  std::ofstream out(path, std::ios::binary);
  HERDSYNTH_ENFORCE(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  HERDSYNTH_ENFORCE(out.good(), ErrorCode::kIo, "failed writing " + path.string());
}

std::vector<float> ReadDepthGrid(const std::filesystem::path& path, int* width, int* height) {
  std::ifstream in(path, std::ios::binary);
  HERDSYNTH_ENFORCE(in.good(), ErrorCode::kIo, "cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  HERDSYNTH_ENFORCE(bytes.size() >= 8, ErrorCode::kIo, path.string() + ": truncated header");
  auto get_u32 = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[at + b]) << (8 * b);
    return v;
  };
  const std::uint32_t w = get_u32(0);
  const std::uint32_t h = get_u32(4);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  HERDSYNTH_ENFORCE(bytes.size() == 8 + 4 * n, ErrorCode::kIo,
                    path.string() + ": payload size does not match header");
  std::vector<float> depth(n);
  for (std::size_t i = 0; i < n; ++i) depth[i] = std::bit_cast<float>(get_u32(8 + 4 * i));
  *width = static_cast<int>(w);
  *height = static_cast<int>(h);
  return depth;
}

}  // namespace herdsynth
