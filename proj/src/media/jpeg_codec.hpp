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

#include <string>

#include "media/image_io.hpp"

DPTC_BEGIN_NAMESPACE

/// Baseline JPEG encode followed by decode, in memory. `image` must be RGB.
Image8 jpeg_round_trip(const Image8& image, int quality);

/// Identity of the linked JPEG codec, recorded in manifests.
std::string jpeg_codec_identity();

DPTC_END_NAMESPACE
