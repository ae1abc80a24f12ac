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

#include <filesystem>
#include <optional>
#include <vector>

#include "core/tensor.hpp"

DPTC_BEGIN_NAMESPACE

/// F x C x H x W frames with values in [0, 1].
struct VideoClip {
  Tensor frames;
  std::optional<double> frame_rate;

  VideoClip() = default;
  explicit VideoClip(Tensor f, std::optional<double> rate = std::nullopt)
      : frames(std::move(f)), frame_rate(rate) {}

  int frame_count() const { return frames.dim(0); }
  int channels() const { return frames.dim(1); }
  int height() const { return frames.dim(2); }
  int width() const { return frames.dim(3); }
  std::int64_t frame_size() const { return frames.numel() / frame_count(); }

  /// Copy of frame f as [C, H, W].
  Tensor frame(int f) const;
  void set_frame(int f, const Tensor& chw);

  /// Throws kInvalidArgument unless F >= 1, C in {1,3}, H,W >= 8 and every value in [0,1].
  void validate() const;
};

bool same_geometry(const VideoClip& a, const VideoClip& b);

/// PNG frame files in `dir`, sorted lexicographically.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);

/// Loads the first `frame_count` frames of a clip directory, normalized to [0,1].
VideoClip load_clip(const std::filesystem::path& dir, int frame_count);
/// Loads every frame of a clip directory.
VideoClip load_clip(const std::filesystem::path& dir);

/// Writes frames as 000000.png, 000001.png, ... (8-bit, rounded).
void save_clip(const VideoClip& clip, const std::filesystem::path& dir);

/// Expands a gray clip to three channels; RGB clips are returned unchanged.
VideoClip to_rgb(const VideoClip& clip);
/// Averages RGB down to one channel.
VideoClip to_gray(const VideoClip& clip);

DPTC_END_NAMESPACE
