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
#include <vector>

#include "media/video_clip.hpp"

DPTC_BEGIN_NAMESPACE

struct ToyFaceOptions {
  int clips = 10;
  int frames = 8;
  int size = 64;
  std::uint64_t seed = 7;
};

/// Procedurally rendered talking-face-like clips: a moving head with hair,
/// blinking eyes and an opening mouth over a gradient background.
std::vector<VideoClip> render_toy_faces(const ToyFaceOptions& options);

/// One clip with index `index` of the set described by `options`.
VideoClip render_toy_face(const ToyFaceOptions& options, int index);

DPTC_END_NAMESPACE
