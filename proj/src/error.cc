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

#include "bpslab/error.h"

namespace bpslab {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kAllZeroWeights: return "AllZeroWeights";
    case ErrorKind::kNegativeWeight: return "NegativeWeight";
    case ErrorKind::kEmptyUtteranceSpace: return "EmptyUtteranceSpace";
    case ErrorKind::kSupportViolation: return "SupportViolation";
    case ErrorKind::kZeroMarginal: return "ZeroMarginal";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kValidation: return "ValidationError";
    case ErrorKind::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace bpslab
