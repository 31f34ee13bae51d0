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

#ifndef BPSLAB_CONDITIONAL_H_
#define BPSLAB_CONDITIONAL_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "bpslab/space.h"

namespace bpslab {

inline constexpr double kRowSumTolerance = 1e-9;

// Row-stochastic table p(target | given...). Rows enumerate the
// conditioning tuple in row-major order (first given space is the slowest
// index); columns enumerate the target space.
//
// Immutable after construction.
class Conditional {
 public:
  // Validates shape, entries >= 0, finite, and row sums within 1e-9.
  // Throws ValidationError naming the first bad row.
  Conditional(std::vector<Space> given, Space target, std::vector<double> table);

  const std::vector<Space>& given() const { return given_; }
  const Space& target() const { return target_; }
  std::size_t num_rows() const { return num_rows_; }
  std::size_t num_cols() const { return target_.size(); }
  const std::vector<double>& table() const { return table_; }

  std::size_t RowIndex(std::span<const std::size_t> given_indices) const;
  std::size_t RowIndex(std::initializer_list<std::size_t> given_indices) const {
    return RowIndex(std::span<const std::size_t>(given_indices.begin(),
                                                 given_indices.size()));
  }
  std::span<const double> Row(std::size_t row) const;
  std::span<const double> Row(std::initializer_list<std::size_t> given_indices) const {
    return Row(RowIndex(given_indices));
  }
  double At(std::size_t row, std::size_t col) const {
    return table_[row * num_cols() + col];
  }

  // "(u=a, c=b)" style label of a row, used in error messages.
  std::string RowLabel(std::size_t row) const;

 private:
  std::vector<Space> given_;
  Space target_;
  std::size_t num_rows_;
  std::vector<double> table_;
};

}  // namespace bpslab

#endif  // BPSLAB_CONDITIONAL_H_
