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

#ifndef BPSLAB_FEEDBACK_H_
#define BPSLAB_FEEDBACK_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bpslab/conditional.h"
#include "bpslab/distribution.h"
#include "bpslab/space.h"

namespace bpslab {

// A target p(u) written as sum_z p(u | z) p(z) over a latent space Z'.
struct StructuredTarget {
  Distribution p_z;
  Conditional p_u_given_z;  // given {latent}, target utterances

  const Space& latents() const { return p_u_given_z.given().at(0); }
  const Space& utterances() const { return p_u_given_z.target(); }
  // Throws ValidationError if p_z is not a distribution over Z'.
  void Validate() const;
};

Distribution ImpliedMarginal(const StructuredTarget& target);

// p(z | u) proportional to p(u | z) p(z). Throws kZeroMarginal when
// p(u) = 0.
Distribution BayesPosterior(const StructuredTarget& target, std::size_t utterance);

// Synthetic target family. Z' and U are products of the listed factor
// sizes (mixed radix, first factor slowest). With one factor each, p(u | z)
// is an arbitrary table; with k factors on both sides it is
// prod_k f_k(u_k | z_k), so latents sharing a factor value share
// parameters. `identity` makes u = z (requires equal factor lists).
// p(z) and every factor row are Dirichlet(1) draws from Rng(target_seed).
struct FeedbackTaskConfig {
  std::vector<std::size_t> latent_factors = {4, 4};
  std::vector<std::size_t> utterance_factors = {4, 4};
  std::uint64_t target_seed = 0;
  bool identity = false;

  void Validate() const;
};

struct FeedbackTask {
  FeedbackTaskConfig config;
  StructuredTarget target;
};

FeedbackTask MakeFeedbackTask(const FeedbackTaskConfig& config);

struct CurvePoint {
  std::size_t budget = 0;
  double kl = 0.0;
};

// KL(learner || target) at each requested feedback budget. Budget 0 is the
// learner's initial state.
struct LearningCurve {
  std::string learner;
  std::uint64_t seed = 0;
  std::vector<CurvePoint> points;
};

struct RewardOnlyOptions {
  double learning_rate = 0.05;
  std::size_t steps_per_feedback = 1;
};

// Variational baseline: q = softmax(theta), theta = 0 initially. Each
// feedback unit proposes u ~ q, receives the single score log p(u), and
// takes `steps_per_feedback` steps along the one-sample score-function
// estimate (log q(u) - log p(u)) (e_u - q) of grad KL(q || p).
LearningCurve RewardOnlyLearner(const FeedbackTask& task, std::span<const std::size_t> checkpoints,
                                std::uint64_t seed, const RewardOnlyOptions& options = {});

struct StructuredOptions {
  double smoothing = 1e-3;          // additive pseudo-count per cell
  double posterior_fraction = 0.5;  // share of posterior-sample units
  bool exploit_structure = true;    // share factor tables across latents
};

// Structured-feedback learner. Units alternate (by `posterior_fraction`)
// between
//   latent samples:    z ~ p(z), delivered with a realization u ~ p(. | z);
//                      updates the estimates of p(z) and p(u | z);
//   posterior samples: the learner proposes u ~ q (its current
//                      reconstruction) and receives z ~ p(. | u); the pair
//                      updates p(u | z).
// A posterior pair is a draw from q(u) p(z | u), which matches the joint
// p(u, z) exactly when q = p, so the reconstruction's fixed point is the
// target. Estimates are Laplace-smoothed counts and the reconstruction is
// p^(u) = sum_z p^(u | z) p^(z).
LearningCurve StructuredFeedbackLearner(const FeedbackTask& task,
                                        std::span<const std::size_t> checkpoints,
                                        std::uint64_t seed,
                                        const StructuredOptions& options = {});

struct SummaryRow {
  std::string learner;
  std::size_t budget = 0;
  double median_kl = 0.0;
};

struct Comparison {
  std::vector<LearningCurve> curves;  // per seed: structured, then reward-only
  std::vector<SummaryRow> summary;    // median KL per (learner, budget)
};

Comparison CompareSampleEfficiency(const FeedbackTask& task, std::span<const std::size_t> budgets,
                                   std::span<const std::uint64_t> seeds,
                                   const StructuredOptions& structured = {},
                                   const RewardOnlyOptions& reward_only = {});

double Median(std::vector<double> values);

inline constexpr const char* kStructuredLearner = "structured";
inline constexpr const char* kRewardOnlyLearner = "reward_only";

}  // namespace bpslab

#endif  // BPSLAB_FEEDBACK_H_
