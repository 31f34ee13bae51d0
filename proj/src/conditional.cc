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

#include "bpslab/conditional.h"

#include <cmath>
#include <sstream>

#include "bpslab/error.h"

namespace bpslab {

Conditional::Conditional(std::vector<Space> given, Space target, std::vector<double> table)
    : given_(std::move(given)), target_(std::move(target)), num_rows_(1), table_(std::move(table)) {
  for (const Space& s : given_) num_rows_ *= s.size();
  if (table_.size() != num_rows_ * num_cols()) {
    std::ostringstream msg;
    msg << "expected " << num_rows_ << " x " << num_cols() << " entries, got " << table_.size();
    throw ValidationError("table", msg.str());
  }
  for (std::size_t r = 0; r < num_rows_; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < num_cols(); ++c) {
      const double v = At(r, c);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream msg;
        msg << "entry " << target_.symbol(c) << " = " << v << " is not a finite non-negative number";
        throw ValidationError("row " + RowLabel(r), msg.str());
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream msg;
      msg.precision(12);
      msg << "row sums to " << sum << ", expected 1";
      throw ValidationError("row " + RowLabel(r), msg.str());
    }
  }
}

std::size_t Conditional::RowIndex(std::span<const std::size_t> given_indices) const {
  if (given_indices.size() != given_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "conditioning tuple has wrong arity");
  }
  std::size_t row = 0;
  for (std::size_t k = 0; k < given_.size(); ++k) {
    if (given_indices[k] >= given_[k].size()) {
      throw Error(ErrorKind::kInvalidArgument,
                  std::string(SpaceKindName(given_[k].kind())) + " index out of range");
    }
    row = row * given_[k].size() + given_indices[k];
  }
  return row;
}

std::span<const double> Conditional::Row(std::size_t row) const {
  if (row >= num_rows_) throw Error(ErrorKind::kInvalidArgument, "row out of range");
  return std::span<const double>(table_).subspan(row * num_cols(), num_cols());
}

std::string Conditional::RowLabel(std::size_t row) const {
  std::vector<std::size_t> idx(given_.size());
  std::size_t rest = row;
  for (std::size_t k = given_.size(); k-- > 0;) {
    idx[k] = rest % given_[k].size();
    rest /= given_[k].size();
  }
  std::string label = "(";
  for (std::size_t k = 0; k < given_.size(); ++k) {
    if (k) label += ", ";
    label += std::string(1, SpaceKindName(given_[k].kind())[0]) + "=" + given_[k].symbol(idx[k]);
  }
  return label + ")";
}

}  // namespace bpslab
