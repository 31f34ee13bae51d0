// Copyright 2026 The bpslab Authors.
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

#ifndef BPSLAB_ERROR_H_
#define BPSLAB_ERROR_H_

#include <stdexcept>
#include <string>

namespace bpslab {

enum class ErrorKind {
  kAllZeroWeights,
  kNegativeWeight,
  kEmptyUtteranceSpace,
  kSupportViolation,
  kZeroMarginal,
  kInvalidArgument,
  kParse,
  kValidation,
  kIo,
};

const char* ErrorKindName(ErrorKind kind);

// All library failures are reported through this type. The kind is stable
// and meant to be matched on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by loaders and constructors; `path` locates the first violation,
// e.g. "$.listener[0][1]".
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& reason)
      : Error(ErrorKind::kValidation, path + ": " + reason),
        path_(std::move(path)),
        reason_(reason) {}

  const std::string& path() const { return path_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string path_;
  std::string reason_;
};

}  // namespace bpslab

#endif  // BPSLAB_ERROR_H_
