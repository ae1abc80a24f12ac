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

#include "media/toy_faces.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "core/rng.hpp"

DPTC_BEGIN_NAMESPACE

namespace {

using Color = std::array<double, 3>;

struct Ellipse {
  double cx, cy, rx, ry;

  // Anti-aliased coverage from an approximate signed distance in pixels.
  double coverage(double x, double y) const {
    const double nx = (x - cx) / rx;
    const double ny = (y - cy) / ry;
    const double r = std::sqrt(nx * nx + ny * ny);
    const double sd = (r - 1.0) * std::min(rx, ry);
    return std::clamp(0.5 - sd, 0.0, 1.0);
  }
};

void blend(Color& dst, const Color& src, double alpha) {
  for (int i = 0; i < 3; ++i) dst[static_cast<size_t>(i)] += alpha * (src[static_cast<size_t>(i)] - dst[static_cast<size_t>(i)]);
}

Color random_color(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

}  // namespace

VideoClip render_toy_face(const ToyFaceOptions& options, int index) {
  check_arg(options.frames >= 1 && options.size >= 8, "toy faces need at least one 8x8 frame");
  Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(index)));
  const double s = options.size;

  const Color bg_top = random_color(rng, 0.1, 0.9);
  const Color bg_bottom = random_color(rng, 0.1, 0.9);
  const Color skin{rng.uniform(0.55, 0.95), rng.uniform(0.4, 0.75), rng.uniform(0.3, 0.6)};
  const Color hair = random_color(rng, 0.02, 0.35);
  const Color eye{0.05, 0.05, 0.08};
  const Color lips{rng.uniform(0.45, 0.75), 0.15, 0.2};
  const double face_rx = s * rng.uniform(0.24, 0.3);
  const double face_ry = s * rng.uniform(0.32, 0.38);
  // Head sway of at most ~0.6 px per frame, like a seated speaker at 25 fps.
  const double amp_x = rng.uniform(0.3, 1.2);
  const double amp_y = rng.uniform(0.2, 0.6);
  const double omega = rng.uniform(0.2, 0.5);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double talk_rate = rng.uniform(0.3, 0.7);
  const int blink_frame = static_cast<int>(rng.below(static_cast<std::uint64_t>(options.frames) + 3));

  Tensor frames(Shape{options.frames, 3, options.size, options.size});
  const int plane = options.size * options.size;
  for (int f = 0; f < options.frames; ++f) {
    const double cx = s / 2 + amp_x * std::sin(omega * f + phase);
    const double cy = s / 2 + amp_y * std::cos(omega * f + phase) + s * 0.03;
    const double mouth_open = 0.015 + 0.03 * (0.5 + 0.5 * std::sin(talk_rate * f * 2.0 + phase));
    const double eye_open = (f == blink_frame) ? 0.6 : 1.0;

    const Ellipse face{cx, cy, face_rx, face_ry};
    const Ellipse hair_cap{cx, cy - face_ry * 0.35, face_rx * 1.08, face_ry * 0.8};
    const Ellipse eye_l{cx - face_rx * 0.4, cy - face_ry * 0.15, s * 0.045, s * 0.04 * eye_open};
    const Ellipse eye_r{cx + face_rx * 0.4, cy - face_ry * 0.15, s * 0.045, s * 0.04 * eye_open};
    const Ellipse nose{cx, cy + face_ry * 0.1, s * 0.025, s * 0.06};
    const Ellipse mouth{cx, cy + face_ry * 0.5, face_rx * 0.45, s * mouth_open};

    for (int y = 0; y < options.size; ++y)
      for (int x = 0; x < options.size; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        Color c;
        const double t = py / s;
        for (int i = 0; i < 3; ++i) c[static_cast<size_t>(i)] = (1 - t) * bg_top[static_cast<size_t>(i)] + t * bg_bottom[static_cast<size_t>(i)];
        // Hair shows only above the face centre line.
        const double hair_mask = std::clamp((cy - face_ry * 0.2 - py) / 2.0 + 0.5, 0.0, 1.0);
        blend(c, hair, hair_cap.coverage(px, py) * hair_mask);
        blend(c, skin, face.coverage(px, py));
        Color nose_c = skin;
        for (auto& v : nose_c) v *= 0.8;
        blend(c, nose_c, nose.coverage(px, py));
        blend(c, eye, eye_l.coverage(px, py));
        blend(c, eye, eye_r.coverage(px, py));
        blend(c, lips, mouth.coverage(px, py));
        for (int ch = 0; ch < 3; ++ch)
          frames[(static_cast<std::int64_t>(f) * 3 + ch) * plane + y * options.size + x] =
              static_cast<Real>(std::clamp(c[static_cast<size_t>(ch)], 0.0, 1.0));
      }
  }
  return VideoClip(std::move(frames), 25.0);
}

std::vector<VideoClip> render_toy_faces(const ToyFaceOptions& options) {
  std::vector<VideoClip> clips;
  clips.reserve(static_cast<size_t>(options.clips));
  for (int i = 0; i < options.clips; ++i) clips.push_back(render_toy_face(options, i));
  return clips;
}

DPTC_END_NAMESPACE
