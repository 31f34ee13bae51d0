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

#ifndef BPSLAB_INFERENCE_H_
#define BPSLAB_INFERENCE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "bpslab/distribution.h"
#include "bpslab/game.h"
#include "bpslab/rng.h"
#include "bpslab/space.h"
#include "bpslab/speakers.h"

namespace bpslab {

// Tabular variational speaker S_theta: one row of logits per
// (intention, context), one column per utterance.
class SoftmaxPolicy {
 public:
  // All-zero logits (uniform rows).
  SoftmaxPolicy(std::size_t num_intentions, std::size_t num_contexts, std::size_t num_utterances);
  // Throws ValidationError on wrong size or non-finite entries.
  SoftmaxPolicy(std::size_t num_intentions, std::size_t num_contexts, std::size_t num_utterances,
                std::vector<double> logits);

  // Logits log S(u | z, c) of a base speaker; zero-probability entries are
  // rejected because a softmax row has full support.
  static SoftmaxPolicy FromSpeaker(const BaseSpeaker& speaker);

  std::size_t num_intentions() const { return num_intentions_; }
  std::size_t num_contexts() const { return num_contexts_; }
  std::size_t num_utterances() const { return num_utterances_; }
  std::size_t RowIndex(std::size_t intention, std::size_t context) const;

  const std::vector<double>& logits() const { return logits_; }
  std::vector<double>& mutable_logits() { return logits_; }
  std::span<const double> Row(std::size_t intention, std::size_t context) const;
  Distribution Probabilities(std::size_t intention, std::size_t context) const;
  std::vector<double> LogProbabilities(std::size_t intention, std::size_t context) const;

 private:
  std::size_t num_intentions_;
  std::size_t num_contexts_;
  std::size_t num_utterances_;
  std::vector<double> logits_;
};

// Everything the KL-regularized objective needs: the reference (pretrained)
// speaker S_0, the reward (with beta) and the task (z*, c).
struct RlhfProblem {
  BaseSpeaker reference;
  RewardTable reward;
  std::size_t target = 0;
  std::size_t context = 0;

  double beta() const { return reward.beta; }
  // R(u, c) for the task context.
  std::vector<double> Rewards() const;
  // Throws kSupportViolation if S_0(. | z*, c) has a zero entry.
  void RequireStrictlyPositiveReference() const;
  // The BPS with base S_0 and the reward-backed ToM listener.
  BpsSpeaker Posterior() const;
};

// -E_{u~S_theta}[R(u)] + beta KL(S_theta || S_0), exact by enumeration.
double RlhfObjective(const SoftmaxPolicy& policy, const RlhfProblem& problem);

// KL(S_theta(. | z, c) || S_bps(. | z, c)), exact. Throws kSupportViolation
// when the posterior is zero where the policy is not.
double VariationalObjective(const SoftmaxPolicy& policy, const BpsSpeaker& posterior,
                            std::size_t intention, std::size_t context);

// log sum_u S_0(u | z*, c) exp(R(u) / beta).
double LogPartition(const RlhfProblem& problem);

// VariationalObjective - RlhfObjective / beta for the problem's posterior.
// Equals LogPartition(problem) for every policy.
double EquivalenceGap(const SoftmaxPolicy& policy, const RlhfProblem& problem);

enum class Objective { kRlhf, kVariational };

// Analytic gradient with respect to every logit (same layout as
// policy.logits()). Only the task row is nonzero.
std::vector<double> ObjectiveGradient(const SoftmaxPolicy& policy, const RlhfProblem& problem,
                                      Objective objective);

// The minimizer of both objectives over the tabular family:
// S_0(u) exp(R(u) / beta) / Z, i.e. the BPS posterior.
Distribution ClosedFormRlhfOptimum(const RlhfProblem& problem);

struct OptimizerOptions {
  double learning_rate = 0.5;
  std::size_t max_steps = 50000;
  double tolerance = 1e-8;
};

struct OptimizeReport {
  std::size_t steps = 0;
  double final_objective = 0.0;   // RlhfObjective at the returned policy
  double final_grad_norm = 0.0;   // max |dKL/dtheta| at the returned policy
  bool converged = false;
};

struct OptimizeProgress {
  std::size_t step;
  double objective;
  double grad_norm;
  double tv_to_closed_form;
};

// Full-batch gradient descent on the KL-regularized objective. Each step is
// theta -= lr * grad(RlhfObjective) / beta, which is gradient descent on
// the variational objective; the 1/beta keeps a fixed lr stable for any
// beta. Stops once the max-norm of that gradient is <= tolerance.
// `observer` (optional) sees step 0, every `observe_every`-th step and the
// final step.
std::pair<SoftmaxPolicy, OptimizeReport> OptimizeVariational(
    const SoftmaxPolicy& init, const RlhfProblem& problem, const OptimizerOptions& options,
    const std::function<void(const OptimizeProgress&)>& observer = nullptr,
    std::size_t observe_every = 100);

// Best-of-n pragmatic inference: draw n candidates from S_base(. | z*, c)
// and keep the one with the highest reward (ties to the lowest utterance
// index). Throws kAllZeroWeights for an empty base row, kInvalidArgument
// for n == 0.
std::size_t McPragmaticInfer(const BaseSpeaker& base, const RewardTable& reward,
                             std::size_t target, std::size_t context, std::size_t n, Rng& rng);

// argmax_u S_base(u | z*, c) exp(R(u) / beta): what best-of-n approximates.
std::size_t ExactPragmaticArgmax(const BaseSpeaker& base, const RewardTable& reward,
                                 std::size_t target, std::size_t context);

// One synthetic human comparison.
struct PreferenceDatum {
  std::size_t first = 0;
  std::size_t second = 0;
  bool first_wins = true;

  std::size_t winner() const { return first_wins ? first : second; }
  std::size_t loser() const { return first_wins ? second : first; }
};

// Synthetic ratings: each pair (a, b) is drawn uniformly among distinct
// utterances; a wins with Bradley-Terry probability
// sigmoid(log L(z*|a,c) - log L(z*|b,c)) = L(a) / (L(a) + L(b)). If both
// listener probabilities are zero the winner is a fair coin.
std::vector<PreferenceDatum> SamplePreferences(const CommunicationGame& game, std::size_t pairs,
                                               Rng& rng);

struct RewardFit {
  RewardTable reward;                     // beta = 1, last utterance pinned to 0
  std::vector<std::size_t> unobserved;    // utterances in no pair
  std::size_t iterations = 0;
  double final_grad_norm = 0.0;
};

// Regularized Bradley-Terry maximum likelihood:
//   max sum log sigmoid(R_winner - R_loser) - reg * sum_u (R_u - mean R)^2
// solved by damped Newton, then shifted so that R(|U|-1) = 0. The penalty
// acts on centred rewards so the fit is equivariant under relabeling.
// Utterances that never appear are pinned by the penalty alone and listed in
// `unobserved`.
RewardFit FitRewardFromPreferences(std::span<const PreferenceDatum> data,
                                   std::size_t num_utterances, double reg = 1e-4);

}  // namespace bpslab

#endif  // BPSLAB_INFERENCE_H_
