// Copyright 2026 The Labelopt Authors
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

#ifndef LABELOPT_ERROR_HPP_
#define LABELOPT_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace labelopt {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kIncompletePrediction,
  kParse,
  kConfig,
  kNotFound,
  kConflict,
  kFailedPrecondition,
  kOracle,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI and the HTTP service) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace labelopt

#endif  // LABELOPT_ERROR_HPP_
