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

#include "bpslab/distribution.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bpslab/error.h"

namespace bpslab {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void CheckSameSize(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "size mismatch " + std::to_string(p.size()) + " vs " +
                    std::to_string(q.size()));
  }
}

}  // namespace

Distribution Normalize(std::span<const double> weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0 || std::isnan(weights[i])) {
      throw Error(ErrorKind::kNegativeWeight,
                  "weight[" + std::to_string(i) + "] = " + std::to_string(weights[i]));
    }
    total += weights[i];
  }
  if (!(total > 0.0)) throw Error(ErrorKind::kAllZeroWeights, "every weight is zero");
  if (std::isinf(total)) throw Error(ErrorKind::kInvalidArgument, "infinite total weight");
  Distribution out(weights.begin(), weights.end());
  for (double& w : out) w /= total;
  return out;
}

double LogSumExp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  const double peak = *std::max_element(values.begin(), values.end());
  if (peak == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

Distribution NormalizeLog(std::span<const double> log_weights) {
  const double lse = LogSumExp(log_weights);
  if (lse == kNegInf) throw Error(ErrorKind::kAllZeroWeights, "every weight is zero");
  if (std::isnan(lse) || std::isinf(lse)) {
    throw Error(ErrorKind::kInvalidArgument, "non-finite log weights");
  }
  Distribution out(log_weights.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_weights[i] - lse);
  return out;
}

std::vector<double> LogSoftmax(std::span<const double> logits) {
  const double lse = LogSumExp(logits);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

Distribution Softmax(std::span<const double> logits) { return NormalizeLog(logits); }

std::size_t ArgmaxLowest(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::kInvalidArgument, "argmax of empty range");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double TotalVariation(std::span<const double> p, std::span<const double> q) {
  CheckSameSize(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

double KlDivergence(std::span<const double> p, std::span<const double> q) {
  CheckSameSize(p, q);
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) {
      throw Error(ErrorKind::kSupportViolation,
                  "q[" + std::to_string(i) + "] = 0 where p > 0");
    }
    kl += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return kl;
}

std::vector<double> Log(std::span<const double> p) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] > 0.0 ? std::log(p[i]) : kNegInf;
  return out;
}

}  // namespace bpslab
