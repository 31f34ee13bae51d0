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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "bpslab/distribution.h"
#include "bpslab/error.h"
#include "bpslab/inference.h"
#include "bpslab/rng.h"
#include "bpslab/speakers.h"

namespace bpslab {
namespace {

const Space kContext(SpaceKind::kContext, {"default"});

BaseSpeaker RowSpeaker(const std::vector<double>& row) {
  Space u = Space::Indexed(SpaceKind::kUtterance, row.size(), "u");
  Space z = Space::Indexed(SpaceKind::kIntention, 1, "z");
  return BaseSpeaker(Conditional({z, kContext}, u, row));
}

RlhfProblem Problem(const std::vector<double>& s0, const std::vector<double>& r, double beta) {
  return RlhfProblem{RowSpeaker(s0), RewardTable{r, beta}, 0, 0};
}

SoftmaxPolicy Policy(const std::vector<double>& logits) {
  return SoftmaxPolicy(1, 1, logits.size(), logits);
}

SoftmaxPolicy PolicyFor(const std::vector<double>& probs) {
  std::vector<double> logits;
  for (double p : probs) logits.push_back(std::log(p));
  return Policy(logits);
}

TEST_CASE("rlhf objective examples") {
  CHECK(std::abs(RlhfObjective(PolicyFor({0.3, 0.7}), Problem({0.3, 0.7}, {0, 0}, 1.0))) <= 1e-12);
  CHECK(RlhfObjective(Policy({0, 0}), Problem({0.5, 0.5}, {1, 0}, 1.0)) ==
        doctest::Approx(-0.5).epsilon(1e-12));
  // Constant reward: -c + beta * KL, KL by direct summation.
  const std::vector<double> q = {0.2, 0.8}, s0 = {0.6, 0.4};
  const double kl = 0.2 * std::log(0.2 / 0.6) + 0.8 * std::log(0.8 / 0.4);
  CHECK(RlhfObjective(PolicyFor(q), Problem(s0, {1.5, 1.5}, 2.0)) ==
        doctest::Approx(-1.5 + 2.0 * kl).epsilon(1e-12));
}

TEST_CASE("rlhf needs a strictly positive reference") {
  try {
    RlhfObjective(Policy({0, 0}), Problem({1.0, 0.0}, {1, 0}, 1.0));
    FAIL("expected SupportViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSupportViolation);
  }
}

TEST_CASE("variational objective examples") {
  const RlhfProblem p = Problem({0.5, 0.5}, {std::log(3.0), 0.0}, 1.0);  // posterior [0.75, 0.25]
  const BpsSpeaker post = p.Posterior();
  CHECK(std::abs(VariationalObjective(PolicyFor({0.75, 0.25}), post, 0, 0)) <= 1e-12);
  const double oracle = 0.5 * std::log(0.5 / 0.75) + 0.5 * std::log(0.5 / 0.25);
  CHECK(VariationalObjective(Policy({0, 0}), post, 0, 0) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(oracle == doctest::Approx(0.14384).epsilon(1e-4));

  Rng rng(9);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> logits(2 + rng.UniformIndex(6)), r(logits.size());
    for (double& x : logits) x = 4 * rng.Uniform() - 2;
    for (double& x : r) x = 4 * rng.Uniform() - 2;
    const RlhfProblem q = Problem(Distribution(r.size(), 1.0 / r.size()), r, 1.0);
    CHECK(VariationalObjective(Policy(logits), q.Posterior(), 0, 0) >= 0.0);
  }
}

TEST_CASE("variational objective reports support violations") {
  // Posterior with a zero: base has a zero entry.
  BpsSpeaker post(RowSpeaker({1.0, 0.0}), TomFromReward(RewardTable{{0.0, 0.0}, 1.0}));
  try {
    VariationalObjective(Policy({0, 0}), post, 0, 0);
    FAIL("expected SupportViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSupportViolation);
  }
}

TEST_CASE("equivalence gap examples") {
  CHECK(std::abs(EquivalenceGap(Policy({0.3, -1}), Problem({0.5, 0.5}, {0, 0}, 1.0))) <= 1e-12);
  const RlhfProblem p = Problem({0.5, 0.5}, {1, 0}, 1.0);
  const double oracle = std::log(0.5 * std::exp(1.0) + 0.5);
  CHECK(std::abs(EquivalenceGap(Policy({0.3, -1}), p) - oracle) <= 1e-12);
  CHECK(oracle == doctest::Approx(0.62011).epsilon(1e-5));
  CHECK(std::abs(LogPartition(p) - oracle) <= 1e-12);
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const double a = EquivalenceGap(Policy({6 * rng.Uniform() - 3, 6 * rng.Uniform() - 3}), p);
    const double b = EquivalenceGap(Policy({6 * rng.Uniform() - 3, 6 * rng.Uniform() - 3}), p);
    CHECK(std::abs(a - b) <= 1e-9);
  }
}

double MaxAbs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

TEST_CASE("objective gradients") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng.UniformIndex(5);
    std::vector<double> s0(n), r(n), logits(n);
    for (std::size_t i = 0; i < n; ++i) {
      s0[i] = 0.05 + rng.Uniform();
      r[i] = 2 * rng.Uniform() - 1;
      logits[i] = 4 * rng.Uniform() - 2;
    }
    const double beta = 1 + 3 * rng.Uniform();
    const RlhfProblem p = Problem(Normalize(s0), r, beta);
    const SoftmaxPolicy policy = Policy(logits);
    const auto g_rlhf = ObjectiveGradient(policy, p, Objective::kRlhf);
    const auto g_vi = ObjectiveGradient(policy, p, Objective::kVariational);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(g_vi[i] - g_rlhf[i] / beta) <= 1e-9);
      SoftmaxPolicy plus = policy, minus = policy;
      plus.mutable_logits()[i] += 1e-5;
      minus.mutable_logits()[i] -= 1e-5;
      const double fd = (RlhfObjective(plus, p) - RlhfObjective(minus, p)) / 2e-5;
      CHECK(std::abs(fd - g_rlhf[i]) <= 1e-6);
      const BpsSpeaker post = p.Posterior();
      const double fd_vi =
          (VariationalObjective(plus, post, 0, 0) - VariationalObjective(minus, post, 0, 0)) / 2e-5;
      CHECK(std::abs(fd_vi - g_vi[i]) <= 1e-6);
    }
  }
  const RlhfProblem p = Problem({0.3, 0.7}, {0.4, -0.2}, 1.5);
  CHECK(MaxAbs(ObjectiveGradient(PolicyFor(ClosedFormRlhfOptimum(p)), p, Objective::kRlhf)) <= 1e-8);
}

TEST_CASE("gradient is zero outside the task row") {
  Space u = Space::Indexed(SpaceKind::kUtterance, 2, "u");
  Space z = Space::Indexed(SpaceKind::kIntention, 2, "z");
  BaseSpeaker s0(Conditional({z, kContext}, u, {0.5, 0.5, 0.2, 0.8}));
  RlhfProblem p{s0, RewardTable{{1.0, 0.0}, 1.0}, 1, 0};
  const auto g = ObjectiveGradient(SoftmaxPolicy(2, 1, 2, {1, 2, 3, 4}), p, Objective::kRlhf);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  CHECK(g[2] != 0.0);
}

TEST_CASE("optimize_variational examples") {
  const OptimizerOptions options;
  {
    const RlhfProblem p = Problem({0.2, 0.3, 0.5}, {0, 0, 0}, 1.0);
    auto [policy, report] = OptimizeVariational(SoftmaxPolicy(1, 1, 3), p, options);
    CHECK(report.converged);
    CHECK(TotalVariation(policy.Probabilities(0, 0), std::vector<double>{0.2, 0.3, 0.5}) <= 1e-6);
  }
  {
    const RlhfProblem p = Problem({0.4, 0.6}, {5, -5}, 1e7);
    auto [policy, report] = OptimizeVariational(SoftmaxPolicy(1, 1, 2), p, options);
    CHECK(TotalVariation(policy.Probabilities(0, 0), std::vector<double>{0.4, 0.6}) <= 1e-5);
  }
  {
    const RlhfProblem p = Problem({0.5, 0.5}, {1, 0}, 1.0);
    const double e = std::exp(1.0);
    const std::vector<double> oracle = {e / (1 + e), 1 / (1 + e)};
    const auto closed = ClosedFormRlhfOptimum(p);
    CHECK(TotalVariation(closed, oracle) <= 1e-12);
    CHECK(oracle[0] == doctest::Approx(0.73106).epsilon(1e-5));
    std::vector<OptimizeProgress> trace;
    auto [policy, report] = OptimizeVariational(
        SoftmaxPolicy(1, 1, 2), p, options, [&](const OptimizeProgress& x) { trace.push_back(x); });
    CHECK(report.converged);
    CHECK(report.final_grad_norm <= options.tolerance);
    CHECK(report.steps <= options.max_steps);
    CHECK(TotalVariation(policy.Probabilities(0, 0), oracle) <= 1e-6);
    REQUIRE(!trace.empty());
    CHECK(trace.front().step == 0);
    CHECK(trace.back().step == report.steps);
  }
  {
    const RlhfProblem p = Problem({0.5, 0.5}, {1, 0}, 1.0);
    auto [policy, report] = OptimizeVariational(SoftmaxPolicy(1, 1, 2), p, {0.5, 3, 1e-8});
    CHECK_FALSE(report.converged);
    CHECK(report.steps == 3);
  }
}

TEST_CASE("mc_pragmatic_infer examples") {
  const RewardTable r{{0.1, 0.9, 0.5, 0.2}, 1.0};
  Rng rng(1);
  Rng copy(1);
  CHECK(McPragmaticInfer(RowSpeaker({0.25, 0.25, 0.25, 0.25}), r, 0, 0, 1, rng) ==
        copy.Categorical(std::vector<double>{0.25, 0.25, 0.25, 0.25}));
  for (int t = 0; t < 20; ++t) {
    CHECK(McPragmaticInfer(RowSpeaker({0, 0, 1, 0}), r, 0, 0, 10, rng) == 2);
  }
  const BaseSpeaker uniform = RowSpeaker({0.25, 0.25, 0.25, 0.25});
  CHECK(ExactPragmaticArgmax(uniform, r, 0, 0) == 1);
  for (int t = 0; t < 50; ++t) CHECK(McPragmaticInfer(uniform, r, 0, 0, 200, rng) == 1);
  CHECK_THROWS(McPragmaticInfer(uniform, r, 0, 0, 0, rng));
  Rng a(77), b(77);
  CHECK(McPragmaticInfer(uniform, r, 0, 0, 3, a) == McPragmaticInfer(uniform, r, 0, 0, 3, b));
}

TEST_CASE("softmax policy") {
  CHECK_THROWS_AS(SoftmaxPolicy(1, 1, 2, {1.0}), ValidationError);
  CHECK_THROWS_AS(SoftmaxPolicy(1, 1, 2, {1.0, INFINITY}), ValidationError);
  const SoftmaxPolicy p = SoftmaxPolicy::FromSpeaker(RowSpeaker({0.25, 0.75}));
  CHECK(p.Probabilities(0, 0)[1] == doctest::Approx(0.75));
  CHECK_THROWS(SoftmaxPolicy::FromSpeaker(RowSpeaker({0.0, 1.0})));
}

}  // namespace
}  // namespace bpslab
