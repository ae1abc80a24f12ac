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
#include <stdexcept>
#include <string>

// Precision of the numeric core. The production library is single precision;
// a double-precision build of the same sources is used for gradient checks.
#if defined(DPTC_USE_DOUBLE)
#define DPTC_PRECISION_NS f64
#else
#define DPTC_PRECISION_NS f32
#endif

#define DPTC_BEGIN_NAMESPACE \
  namespace dptc {           \
  inline namespace DPTC_PRECISION_NS {
#define DPTC_END_NAMESPACE \
  }                        \
  }

DPTC_BEGIN_NAMESPACE

#if defined(DPTC_USE_DOUBLE)
using Real = double;
#else
using Real = float;
#endif

/// Error categories; the C API and CLI map these to status and exit codes.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kIo = 2,
  kConfig = 3,
  kMissingPrerequisite = 4,
  kNumeric = 5,
  kInternal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void check_arg(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::kInvalidArgument, message);
}

DPTC_END_NAMESPACE
