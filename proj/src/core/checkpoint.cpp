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

#include "core/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

DPTC_BEGIN_NAMESPACE

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'D', 'P', 'T', 'C', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T take(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) fail(ErrorCode::kIo, "checkpoint truncated");
  return value;
}

std::string take_string(std::istream& is) {
  const auto n = take<std::uint32_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) fail(ErrorCode::kIo, "checkpoint truncated");
  return s;
}

}  // namespace

std::string digest_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void Checkpoint::add_params(const ParamSet& params, const std::string& prefix) {
  for (const auto& [name, p] : params.items()) add(prefix + name, p->value);
}

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : blocks)
    if (n == name) return &t;
  return nullptr;
}

const Tensor& Checkpoint::get(const std::string& name) const {
  const Tensor* t = find(name);
  if (!t) fail(ErrorCode::kIo, "checkpoint has no block named " + name);
  return *t;
}

void Checkpoint::load_params(const ParamSet& params, const std::string& prefix) const {
  for (const auto& [name, p] : params.items()) {
    const Tensor& t = get(prefix + name);
    if (!t.same_shape(p->value))
      fail(ErrorCode::kConfig, "checkpoint block " + prefix + name + " has shape " + shape_to_string(t.shape()) +
                                   ", model expects " + shape_to_string(p->shape()));
    p->value = t;
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorCode::kIo, "cannot write " + tmp);
    os.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(os, ckpt.format_version);
    put_string(os, ckpt.config_digest);
    put<std::uint64_t>(os, ckpt.step_count);
    put_string(os, ckpt.config_json);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.blocks.size()));
    for (const auto& [name, t] : ckpt.blocks) {
      put_string(os, name);
      put<std::uint8_t>(os, static_cast<std::uint8_t>(sizeof(Real)));
      put<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
      for (int d : t.shape()) put<std::int32_t>(os, d);
      os.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.numel() * sizeof(Real)));
    }
    if (!os) fail(ErrorCode::kIo, "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::kIo, "cannot open checkpoint " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0)
    fail(ErrorCode::kIo, path.string() + " is not a checkpoint file");
  Checkpoint ckpt;
  ckpt.format_version = take<std::uint32_t>(is);
  if (ckpt.format_version != kCheckpointFormatVersion)
    fail(ErrorCode::kIo, "unsupported checkpoint format version " + std::to_string(ckpt.format_version));
  ckpt.config_digest = take_string(is);
  ckpt.step_count = take<std::uint64_t>(is);
  ckpt.config_json = take_string(is);
  const auto count = take<std::uint32_t>(is);
  for (std::uint32_t b = 0; b < count; ++b) {
    std::string name = take_string(is);
    const auto width = take<std::uint8_t>(is);
    const auto rank = take<std::uint32_t>(is);
    Shape shape(rank);
    for (auto& d : shape) d = take<std::int32_t>(is);
    Tensor t(shape);
    if (width == sizeof(Real)) {
      is.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.numel() * sizeof(Real)));
    } else if (width == 4 || width == 8) {
      for (auto& v : t.values()) v = width == 4 ? static_cast<Real>(take<float>(is)) : static_cast<Real>(take<double>(is));
    } else {
      fail(ErrorCode::kIo, "unknown element width in block " + name);
    }
    if (!is) fail(ErrorCode::kIo, "checkpoint truncated in block " + name);
    ckpt.add(std::move(name), std::move(t));
  }
  return ckpt;
}

void copy_param_values(const ParamSet& from, const ParamSet& to) {
  check_arg(from.size() == to.size(), "copy_param_values: parameter count mismatch");
  for (size_t i = 0; i < from.size(); ++i) {
    const auto& [name_a, a] = from.items()[i];
    const auto& [name_b, b] = to.items()[i];
    check_arg(name_a == name_b && a->value.same_shape(b->value), "copy_param_values: mismatch at " + name_a);
    b->value = a->value;
  }
}

DPTC_END_NAMESPACE
