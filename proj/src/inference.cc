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

#include "bpslab/inference.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bpslab/error.h"

namespace bpslab {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double MaxAbs(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

// q_u (a_u - E_q[a]): the softmax chain rule for sum_u q_u a_u-type
// objectives whose per-utterance term depends on log q.
std::vector<double> SoftmaxChainRule(std::span<const double> q, std::span<const double> a) {
  double mean = 0.0;
  for (std::size_t u = 0; u < q.size(); ++u) mean += q[u] * a[u];
  std::vector<double> grad(q.size());
  for (std::size_t u = 0; u < q.size(); ++u) grad[u] = q[u] * (a[u] - mean);
  return grad;
}

// Per-utterance term of the objective (up to a theta-independent shift).
std::vector<double> RlhfTerms(std::span<const double> log_q, const RlhfProblem& problem) {
  problem.RequireStrictlyPositiveReference();
  const auto reference = problem.reference.Row(problem.target, problem.context);
  const std::vector<double> rewards = problem.Rewards();
  std::vector<double> a(log_q.size());
  for (std::size_t u = 0; u < a.size(); ++u) {
    a[u] = -rewards[u] + problem.beta() * (log_q[u] - std::log(reference[u]));
  }
  return a;
}

std::vector<double> VariationalTerms(std::span<const double> q, std::span<const double> log_q,
                                     const BpsSpeaker& posterior, std::size_t intention,
                                     std::size_t context) {
  std::vector<double> log_p = BpsLogWeights(posterior, intention, context);
  const double lse = LogSumExp(log_p);
  if (lse == kNegInf) throw Error(ErrorKind::kAllZeroWeights, "posterior has no support");
  std::vector<double> a(q.size());
  for (std::size_t u = 0; u < a.size(); ++u) {
    if (log_p[u] == kNegInf) {
      if (q[u] > 0.0) {
        throw Error(ErrorKind::kSupportViolation,
                    "posterior is zero at utterance " + std::to_string(u) +
                        " where the policy is positive (KL is infinite)");
      }
      a[u] = 0.0;
      continue;
    }
    a[u] = log_q[u] - (log_p[u] - lse);
  }
  return a;
}

}  // namespace

SoftmaxPolicy::SoftmaxPolicy(std::size_t num_intentions, std::size_t num_contexts,
                             std::size_t num_utterances)
    : SoftmaxPolicy(num_intentions, num_contexts, num_utterances,
                    std::vector<double>(num_intentions * num_contexts * num_utterances, 0.0)) {}

SoftmaxPolicy::SoftmaxPolicy(std::size_t num_intentions, std::size_t num_contexts,
                             std::size_t num_utterances, std::vector<double> logits)
    : num_intentions_(num_intentions),
      num_contexts_(num_contexts),
      num_utterances_(num_utterances),
      logits_(std::move(logits)) {
  if (num_intentions_ == 0 || num_contexts_ == 0 || num_utterances_ == 0) {
    throw ValidationError("policy", "every dimension must be >= 1");
  }
  if (logits_.size() != num_intentions_ * num_contexts_ * num_utterances_) {
    throw ValidationError("policy", "logit table has wrong size");
  }
  for (double v : logits_) {
    if (!std::isfinite(v)) throw ValidationError("policy", "logits must be finite");
  }
}

SoftmaxPolicy SoftmaxPolicy::FromSpeaker(const BaseSpeaker& speaker) {
  std::vector<double> logits;
  logits.reserve(speaker.dist().table().size());
  for (double p : speaker.dist().table()) {
    if (!(p > 0.0)) {
      throw ValidationError("speaker", "softmax policy needs strictly positive probabilities");
    }
    logits.push_back(std::log(p));
  }
  return SoftmaxPolicy(speaker.intentions().size(), speaker.contexts().size(),
                       speaker.utterances().size(), std::move(logits));
}

std::size_t SoftmaxPolicy::RowIndex(std::size_t intention, std::size_t context) const {
  if (intention >= num_intentions_ || context >= num_contexts_) {
    throw Error(ErrorKind::kInvalidArgument, "policy row out of range");
  }
  return intention * num_contexts_ + context;
}

std::span<const double> SoftmaxPolicy::Row(std::size_t intention, std::size_t context) const {
  return std::span<const double>(logits_).subspan(RowIndex(intention, context) * num_utterances_,
                                                  num_utterances_);
}

Distribution SoftmaxPolicy::Probabilities(std::size_t intention, std::size_t context) const {
  return Softmax(Row(intention, context));
}

std::vector<double> SoftmaxPolicy::LogProbabilities(std::size_t intention,
                                                    std::size_t context) const {
  return LogSoftmax(Row(intention, context));
}

std::vector<double> RlhfProblem::Rewards() const {
  std::vector<double> r(reward.num_utterances());
  for (std::size_t u = 0; u < r.size(); ++u) r[u] = reward.Value(u, context);
  return r;
}

void RlhfProblem::RequireStrictlyPositiveReference() const {
  const auto row = reference.Row(target, context);
  for (std::size_t u = 0; u < row.size(); ++u) {
    if (!(row[u] > 0.0)) {
      throw Error(ErrorKind::kSupportViolation,
                  "reference speaker is zero at '" + reference.utterances().symbol(u) +
                      "'; a softmax policy has full support so the KL term is infinite");
    }
  }
}

BpsSpeaker RlhfProblem::Posterior() const {
  return BpsSpeaker(reference,
                    TomFromReward(reward, reference.utterances(), reference.contexts()));
}

double RlhfObjective(const SoftmaxPolicy& policy, const RlhfProblem& problem) {
  const Distribution q = policy.Probabilities(problem.target, problem.context);
  const std::vector<double> log_q = policy.LogProbabilities(problem.target, problem.context);
  if (q.size() != problem.reward.num_utterances()) {
    throw Error(ErrorKind::kInvalidArgument, "policy and reward disagree on |U|");
  }
  const std::vector<double> a = RlhfTerms(log_q, problem);
  double value = 0.0;
  for (std::size_t u = 0; u < q.size(); ++u) value += q[u] * a[u];
  return value;
}

double VariationalObjective(const SoftmaxPolicy& policy, const BpsSpeaker& posterior,
                            std::size_t intention, std::size_t context) {
  const Distribution q = policy.Probabilities(intention, context);
  const std::vector<double> log_q = policy.LogProbabilities(intention, context);
  const std::vector<double> a = VariationalTerms(q, log_q, posterior, intention, context);
  double value = 0.0;
  for (std::size_t u = 0; u < q.size(); ++u) value += q[u] * a[u];
  return std::max(value, 0.0);
}

double LogPartition(const RlhfProblem& problem) {
  const auto reference = problem.reference.Row(problem.target, problem.context);
  const std::vector<double> rewards = problem.Rewards();
  std::vector<double> terms(rewards.size());
  for (std::size_t u = 0; u < terms.size(); ++u) {
    terms[u] = reference[u] > 0.0 ? std::log(reference[u]) + rewards[u] / problem.beta() : kNegInf;
  }
  return LogSumExp(terms);
}

double EquivalenceGap(const SoftmaxPolicy& policy, const RlhfProblem& problem) {
  const Distribution q = policy.Probabilities(problem.target, problem.context);
  const std::vector<double> log_q = policy.LogProbabilities(problem.target, problem.context);
  const BpsSpeaker posterior = problem.Posterior();
  // Unclamped KL so that the difference is not biased near zero.
  const std::vector<double> a_vi =
      VariationalTerms(q, log_q, posterior, problem.target, problem.context);
  double vi = 0.0;
  for (std::size_t u = 0; u < q.size(); ++u) vi += q[u] * a_vi[u];
  return vi - RlhfObjective(policy, problem) / problem.beta();
}

std::vector<double> ObjectiveGradient(const SoftmaxPolicy& policy, const RlhfProblem& problem,
                                      Objective objective) {
  const Distribution q = policy.Probabilities(problem.target, problem.context);
  const std::vector<double> log_q = policy.LogProbabilities(problem.target, problem.context);
  std::vector<double> a;
  if (objective == Objective::kRlhf) {
    a = RlhfTerms(log_q, problem);
  } else {
    a = VariationalTerms(q, log_q, problem.Posterior(), problem.target, problem.context);
  }
  const std::vector<double> row_grad = SoftmaxChainRule(q, a);
  std::vector<double> grad(policy.logits().size(), 0.0);
  const std::size_t offset =
      policy.RowIndex(problem.target, problem.context) * policy.num_utterances();
  std::copy(row_grad.begin(), row_grad.end(), grad.begin() + static_cast<std::ptrdiff_t>(offset));
  return grad;
}

Distribution ClosedFormRlhfOptimum(const RlhfProblem& problem) {
  return BpsDistribution(problem.Posterior(), problem.target, problem.context);
}

std::pair<SoftmaxPolicy, OptimizeReport> OptimizeVariational(
    const SoftmaxPolicy& init, const RlhfProblem& problem, const OptimizerOptions& options,
    const std::function<void(const OptimizeProgress&)>& observer, std::size_t observe_every) {
  if (!(options.learning_rate > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "learning rate must be positive");
  }
  problem.RequireStrictlyPositiveReference();
  SoftmaxPolicy policy = init;
  const std::size_t n_u = policy.num_utterances();
  const std::size_t offset = policy.RowIndex(problem.target, problem.context) * n_u;
  const Distribution optimum = observer ? ClosedFormRlhfOptimum(problem) : Distribution{};
  const double scale = options.learning_rate / problem.beta();

  auto observe = [&](std::size_t step, double grad_norm) {
    if (!observer) return;
    const Distribution q = policy.Probabilities(problem.target, problem.context);
    observer({step, RlhfObjective(policy, problem), grad_norm, TotalVariation(q, optimum)});
  };

  OptimizeReport report;
  std::size_t step = 0;
  double grad_norm = 0.0;
  while (true) {
    const std::vector<double> grad = ObjectiveGradient(policy, problem, Objective::kRlhf);
    grad_norm = MaxAbs(grad) / problem.beta();
    const bool done = grad_norm <= options.tolerance || step >= options.max_steps;
    if (step == 0 || done || (observe_every > 0 && step % observe_every == 0)) {
      observe(step, grad_norm);
    }
    if (done) break;
    std::vector<double>& logits = policy.mutable_logits();
    for (std::size_t u = 0; u < n_u; ++u) logits[offset + u] -= scale * grad[offset + u];
    ++step;
  }
  report.steps = step;
  report.final_grad_norm = grad_norm;
  report.converged = grad_norm <= options.tolerance;
  report.final_objective = RlhfObjective(policy, problem);
  return {std::move(policy), report};
}

std::size_t McPragmaticInfer(const BaseSpeaker& base, const RewardTable& reward,
                             std::size_t target, std::size_t context, std::size_t n, Rng& rng) {
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "need at least one candidate");
  if (reward.num_utterances() != base.utterances().size()) {
    throw Error(ErrorKind::kInvalidArgument, "reward and base speaker disagree on |U|");
  }
  const auto row = base.Row(target, context);
  std::size_t best = rng.Categorical(row);
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t candidate = rng.Categorical(row);
    const double r_candidate = reward.Value(candidate, context);
    const double r_best = reward.Value(best, context);
    if (r_candidate > r_best || (r_candidate == r_best && candidate < best)) best = candidate;
  }
  return best;
}

std::size_t ExactPragmaticArgmax(const BaseSpeaker& base, const RewardTable& reward,
                                 std::size_t target, std::size_t context) {
  const auto row = base.Row(target, context);
  std::vector<double> scores(row.size());
  for (std::size_t u = 0; u < row.size(); ++u) {
    scores[u] = row[u] > 0.0 ? std::log(row[u]) + reward.Value(u, context) / reward.beta : kNegInf;
  }
  if (*std::max_element(scores.begin(), scores.end()) == kNegInf) {
    throw Error(ErrorKind::kAllZeroWeights, "base speaker row has no mass");
  }
  return ArgmaxLowest(scores);
}

std::vector<PreferenceDatum> SamplePreferences(const CommunicationGame& game, std::size_t pairs,
                                               Rng& rng) {
  std::vector<PreferenceDatum> data;
  if (pairs == 0) return data;
  const std::size_t n = game.utterances().size();
  if (n < 2) throw Error(ErrorKind::kInvalidArgument, "preferences need at least two utterances");
  const std::vector<double> column = game.TargetColumn();
  data.reserve(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    PreferenceDatum d;
    d.first = rng.UniformIndex(n);
    d.second = rng.UniformIndex(n - 1);
    if (d.second >= d.first) ++d.second;
    const double a = column[d.first];
    const double b = column[d.second];
    const double p_first = (a + b) > 0.0 ? a / (a + b) : 0.5;
    d.first_wins = rng.Bernoulli(p_first);
    data.push_back(d);
  }
  return data;
}

}  // namespace bpslab
