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

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "core/common.hpp"

DPTC_BEGIN_NAMESPACE

/// Interleaved 8-bit image (HWC), 1 or 3 channels.
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;
};

/// Reads a PNG. Gray sources stay single channel unless `force_rgb`; colour
/// sources are returned as RGB. Alpha is composited away by libpng.
Image8 read_png(const std::filesystem::path& path, bool force_rgb = false);
bool png_is_color(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image8& image);

DPTC_END_NAMESPACE
