// Copyright 2026 The prunelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRUNELAB_ERROR_HPP_
#define PRUNELAB_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace prunelab {

enum class ErrorCode {
  kShapeMismatch,
  kInvalidArgument,
  kNotScalar,
  kEmptyTape,
  kDivergence,
  kMissingSnapshot,
  kFrozenTeacherMutated,
  kNormChainViolation,
  kBadMagic,
  kVersionMismatch,
  kChecksumMismatch,
  kTruncated,
  kCountMismatch,
  kIo,
  kConfig,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries a stable code so the CLI can
// print a machine-parsable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Raised when a training step produces a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, const std::string& message)
      : Error(ErrorCode::kDivergence, message), step_(step) {}

  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace prunelab

#endif  // PRUNELAB_ERROR_HPP_
