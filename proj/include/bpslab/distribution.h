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

#ifndef BPSLAB_DISTRIBUTION_H_
#define BPSLAB_DISTRIBUTION_H_

#include <cstddef>
#include <span>
#include <vector>

namespace bpslab {

// Probability vector over an indexed space.
using Distribution = std::vector<double>;

// Rescales non-negative weights to sum to one.
// Throws kNegativeWeight / kAllZeroWeights.
Distribution Normalize(std::span<const double> weights);

// Normalize(exp(log_weights)) computed with max subtraction. -inf entries
// map to exact zeros; all -inf throws kAllZeroWeights.
Distribution NormalizeLog(std::span<const double> log_weights);

double LogSumExp(std::span<const double> values);

Distribution Softmax(std::span<const double> logits);

// log(softmax(logits)), exact for large logits.
std::vector<double> LogSoftmax(std::span<const double> logits);

// Lowest index attaining the maximum. Throws kInvalidArgument if empty.
std::size_t ArgmaxLowest(std::span<const double> values);

// Half L1 distance. Throws kInvalidArgument on size mismatch.
double TotalVariation(std::span<const double> p, std::span<const double> q);

// KL(p || q) in nats with 0 log 0 = 0. Throws kSupportViolation where
// p > 0 and q == 0.
double KlDivergence(std::span<const double> p, std::span<const double> q);

// Natural logs elementwise, log(0) = -inf.
std::vector<double> Log(std::span<const double> p);

}  // namespace bpslab

#endif  // BPSLAB_DISTRIBUTION_H_
