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

#include <vector>

#include <Eigen/Core>

#include "codec/perceptual.hpp"
#include "media/video_clip.hpp"

DPTC_BEGIN_NAMESPACE

/// 10 log10(1 / MSE) over all frames and channels; +infinity when MSE is 0.
double psnr(const VideoClip& a, const VideoClip& b);
/// PSNR of each frame pair.
std::vector<double> psnr_per_frame(const VideoClip& a, const VideoClip& b);

/// Mean squared difference of consecutive frames in 0-255 units.
double ifd(const VideoClip& clip);

/// Mean over frames and extractor layers of the RMS feature difference.
double perceptual_distance(const VideoClip& a, const VideoClip& b, const FeatureExtractor& phi);
std::vector<double> perceptual_per_frame(const VideoClip& a, const VideoClip& b, const FeatureExtractor& phi);

/// Frechet distance between Gaussians fitted to two sample sets (rows are samples).
double frechet_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Spatially pooled last-layer features, one row per frame.
Eigen::MatrixXd pooled_features(const VideoClip& clip, const FeatureExtractor& phi);

DPTC_END_NAMESPACE
