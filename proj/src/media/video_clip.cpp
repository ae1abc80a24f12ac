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

#include "media/video_clip.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "media/image_io.hpp"

DPTC_BEGIN_NAMESPACE

namespace fs = std::filesystem;

Tensor VideoClip::frame(int f) const {
  Tensor out(Shape{channels(), height(), width()});
  std::copy_n(frames.data() + f * frame_size(), frame_size(), out.data());
  return out;
}

void VideoClip::set_frame(int f, const Tensor& chw) {
  check_arg(chw.numel() == frame_size(), "set_frame: frame size mismatch");
  std::copy_n(chw.data(), frame_size(), frames.data() + f * frame_size());
}

void VideoClip::validate() const {
  check_arg(frames.rank() == 4, "clip must be F x C x H x W, got " + shape_to_string(frames.shape()));
  check_arg(frame_count() >= 1, "clip has no frames");
  check_arg(channels() == 1 || channels() == 3, "clip channel count must be 1 or 3");
  check_arg(height() >= 8 && width() >= 8, "clip frames must be at least 8x8");
  for (Real v : frames.values()) {
    check_arg(std::isfinite(v) && v >= Real(0) && v <= Real(1), "clip values must lie in [0,1]");
  }
  if (frame_rate) check_arg(*frame_rate > 0.0, "frame rate must be positive");
}

bool same_geometry(const VideoClip& a, const VideoClip& b) { return a.frames.same_shape(b.frames); }

std::vector<fs::path> list_frame_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

namespace {

VideoClip load_frames(const fs::path& dir, const std::vector<fs::path>& files) {
  const bool color = png_is_color(files.front());
  Image8 first = read_png(files.front(), color);
  const int c = first.channels;
  Tensor frames(Shape{static_cast<int>(files.size()), c, first.height, first.width});
  VideoClip clip(std::move(frames));
  for (size_t f = 0; f < files.size(); ++f) {
    Image8 img = f == 0 ? std::move(first) : read_png(files[f], color);
    if (img.width != clip.width() || img.height != clip.height())
      fail(ErrorCode::kInvalidArgument, "inconsistent frame dimensions in " + dir.string() + ": " +
                                            files[f].filename().string() + " is " + std::to_string(img.width) +
                                            "x" + std::to_string(img.height));
    Real* dst = clip.frames.data() + static_cast<std::int64_t>(f) * clip.frame_size();
    const int plane = img.width * img.height;
    for (int p = 0; p < plane; ++p)
      for (int ch = 0; ch < c; ++ch)
        dst[static_cast<std::int64_t>(ch) * plane + p] = static_cast<Real>(img.pixels[static_cast<size_t>(p * c + ch)]) / Real(255);
  }
  clip.validate();
  return clip;
}

}  // namespace

VideoClip load_clip(const fs::path& dir, int frame_count) {
  check_arg(frame_count >= 1, "frame_count must be positive");
  if (!fs::is_directory(dir)) fail(ErrorCode::kIo, "missing clip directory " + dir.string());
  auto files = list_frame_files(dir);
  if (static_cast<int>(files.size()) < frame_count)
    fail(ErrorCode::kInvalidArgument, "insufficient frames in " + dir.string() + ": found " +
                                          std::to_string(files.size()) + ", need " + std::to_string(frame_count));
  files.resize(static_cast<size_t>(frame_count));
  return load_frames(dir, files);
}

VideoClip load_clip(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorCode::kIo, "missing clip directory " + dir.string());
  const auto files = list_frame_files(dir);
  if (files.empty()) fail(ErrorCode::kInvalidArgument, "insufficient frames in " + dir.string() + ": found 0");
  return load_frames(dir, files);
}

void save_clip(const VideoClip& clip, const fs::path& dir) {
  fs::create_directories(dir);
  const int c = clip.channels();
  const int plane = clip.height() * clip.width();
  for (int f = 0; f < clip.frame_count(); ++f) {
    Image8 img{clip.width(), clip.height(), c, std::vector<std::uint8_t>(static_cast<size_t>(plane) * c)};
    const Real* src = clip.frames.data() + f * clip.frame_size();
    for (int p = 0; p < plane; ++p)
      for (int ch = 0; ch < c; ++ch) {
        const double v = std::clamp(static_cast<double>(src[static_cast<std::int64_t>(ch) * plane + p]), 0.0, 1.0);
        img.pixels[static_cast<size_t>(p * c + ch)] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    char name[32];
    std::snprintf(name, sizeof name, "%06d.png", f);
    write_png(dir / name, img);
  }
}

VideoClip to_rgb(const VideoClip& clip) {
  if (clip.channels() == 3) return clip;
  const int plane = clip.height() * clip.width();
  Tensor out(Shape{clip.frame_count(), 3, clip.height(), clip.width()});
  for (int f = 0; f < clip.frame_count(); ++f)
    for (int ch = 0; ch < 3; ++ch)
      std::copy_n(clip.frames.data() + static_cast<std::int64_t>(f) * plane, plane,
                  out.data() + (static_cast<std::int64_t>(f) * 3 + ch) * plane);
  return VideoClip(std::move(out), clip.frame_rate);
}

VideoClip to_gray(const VideoClip& clip) {
  if (clip.channels() == 1) return clip;
  const int plane = clip.height() * clip.width();
  Tensor out(Shape{clip.frame_count(), 1, clip.height(), clip.width()});
  for (int f = 0; f < clip.frame_count(); ++f) {
    const Real* src = clip.frames.data() + static_cast<std::int64_t>(f) * 3 * plane;
    for (int p = 0; p < plane; ++p)
      out[static_cast<std::int64_t>(f) * plane + p] = (src[p] + src[plane + p] + src[2 * plane + p]) / Real(3);
  }
  return VideoClip(std::move(out), clip.frame_rate);
}

DPTC_END_NAMESPACE
