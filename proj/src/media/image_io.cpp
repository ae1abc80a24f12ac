// Copyright 2026 The dptempcoh Authors
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

#include "media/image_io.hpp"

#include <png.h>

#include <cstring>

DPTC_BEGIN_NAMESPACE

namespace {

png_image begin_read(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    fail(ErrorCode::kIo, "cannot read PNG " + path.string() + ": " + img.message);
  return img;
}

}  // namespace

bool png_is_color(const std::filesystem::path& path) {
  png_image img = begin_read(path);
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png_image_free(&img);
  return color;
}

Image8 read_png(const std::filesystem::path& path, bool force_rgb) {
  png_image img = begin_read(path);
  const bool color = force_rgb || (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Image8 out;
  out.width = static_cast<int>(img.width);
  out.height = static_cast<int>(img.height);
  out.channels = color ? 3 : 1;
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string message = img.message;
    png_image_free(&img);
    fail(ErrorCode::kIo, "cannot decode PNG " + path.string() + ": " + message);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Image8& image) {
  check_arg(image.channels == 1 || image.channels == 3, "write_png: 1 or 3 channels required");
  check_arg(image.pixels.size() == static_cast<size_t>(image.width) * image.height * image.channels,
            "write_png: pixel buffer size mismatch");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.pixels.data(), 0, nullptr))
    fail(ErrorCode::kIo, "cannot write PNG " + path.string() + ": " + img.message);
}

DPTC_END_NAMESPACE
