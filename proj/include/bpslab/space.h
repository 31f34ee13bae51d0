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

#ifndef BPSLAB_SPACE_H_
#define BPSLAB_SPACE_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bpslab {

enum class SpaceKind { kUtterance, kIntention, kContext };

const char* SpaceKindName(SpaceKind kind);

// A finite, ordered alphabet. The index of a symbol is its position.
class Space {
 public:
  // Throws ValidationError on empty list, empty symbol or duplicate.
  Space(SpaceKind kind, std::vector<std::string> symbols);

  // Symbols "<prefix>0" .. "<prefix>{n-1}".
  static Space Indexed(SpaceKind kind, std::size_t n, std::string_view prefix);

  SpaceKind kind() const { return kind_; }
  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  const std::string& symbol(std::size_t i) const { return symbols_.at(i); }
  std::optional<std::size_t> IndexOf(std::string_view symbol) const;

  friend bool operator==(const Space&, const Space&) = default;

 private:
  SpaceKind kind_;
  std::vector<std::string> symbols_;
};

}  // namespace bpslab

#endif  // BPSLAB_SPACE_H_
