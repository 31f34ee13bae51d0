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

#include "bpslab/space.h"

#include <unordered_set>

#include "bpslab/error.h"

namespace bpslab {

const char* SpaceKindName(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::kUtterance: return "utterance";
    case SpaceKind::kIntention: return "intention";
    case SpaceKind::kContext: return "context";
  }
  return "unknown";
}

Space::Space(SpaceKind kind, std::vector<std::string> symbols)
    : kind_(kind), symbols_(std::move(symbols)) {
  const std::string where = std::string(SpaceKindName(kind_)) + " space";
  if (symbols_.empty()) throw ValidationError(where, "must have at least one symbol");
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    const std::string path = where + "[" + std::to_string(i) + "]";
    if (symbols_[i].empty()) throw ValidationError(path, "empty symbol");
    if (!seen.insert(symbols_[i]).second) {
      throw ValidationError(path, "duplicate symbol '" + symbols_[i] + "'");
    }
  }
}

Space Space::Indexed(SpaceKind kind, std::size_t n, std::string_view prefix) {
  std::vector<std::string> symbols;
  symbols.reserve(n);
  for (std::size_t i = 0; i < n; ++i) symbols.push_back(std::string(prefix) + std::to_string(i));
  return Space(kind, std::move(symbols));
}

std::optional<std::size_t> Space::IndexOf(std::string_view symbol) const {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i] == symbol) return i;
  }
  return std::nullopt;
}

}  // namespace bpslab
