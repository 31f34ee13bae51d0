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

#include "bpslab/diagnosis.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bpslab/error.h"

namespace bpslab {
namespace {

void RequireSpeakerSize(std::span<const double> speaker, const CommunicationGame& game) {
  if (speaker.size() != game.utterances().size()) {
    throw Error(ErrorKind::kInvalidArgument, "speaker distribution must cover every utterance");
  }
}

// Highest `key` among candidates; ties to the lowest utterance index.
std::size_t PickBest(std::span<const std::size_t> candidates, std::span<const double> key) {
  std::size_t best = candidates[0];
  for (std::size_t c : candidates.subspan(1)) {
    if (key[c] > key[best] || (key[c] == key[best] && c < best)) best = c;
  }
  return best;
}

struct RunningMean {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void Add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  double StandardError() const {
    if (count < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
  }
};

}  // namespace

const char* MetricName(Metric metric) {
  return metric == Metric::kListenerProbability ? "expected_listener_probability"
                                                : "argmax_success_rate";
}

const char* VerdictName(Verdict verdict) {
  switch (verdict) {
    case Verdict::kSearchLimited: return "search-limited";
    case Verdict::kPragmaticsLimited: return "pragmatics-limited";
    case Verdict::kInferenceLimited: return "inference-limited";
    case Verdict::kAdequate: return "adequate";
  }
  return "unknown";
}

double ScoreUtterance(const CommunicationGame& game, std::size_t utterance, Metric metric) {
  const std::vector<double> column = game.TargetColumn();
  if (metric == Metric::kListenerProbability) return column.at(utterance);
  const double best = *std::max_element(column.begin(), column.end());
  return column.at(utterance) == best ? 1.0 : 0.0;
}

double EvaluatePerformance(std::span<const double> speaker, const CommunicationGame& game,
                           std::size_t trials, std::uint64_t seed, Metric metric) {
  RequireSpeakerSize(speaker, game);
  std::vector<double> scores(speaker.size());
  for (std::size_t u = 0; u < scores.size(); ++u) scores[u] = ScoreUtterance(game, u, metric);
  if (trials == 0) {
    const Distribution p = Normalize(speaker);
    return std::inner_product(p.begin(), p.end(), scores.begin(), 0.0);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng = DeriveStream(seed, i);
    sum += scores[rng.Categorical(speaker)];
  }
  return sum / static_cast<double>(trials);
}

std::size_t OracleBestOfN(std::span<const double> speaker, const CommunicationGame& game,
                          std::size_t n, Rng& rng) {
  RequireSpeakerSize(speaker, game);
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "need at least one candidate");
  const std::vector<double> column = game.TargetColumn();
  std::vector<std::size_t> candidates(n);
  for (std::size_t& c : candidates) c = rng.Categorical(speaker);
  return PickBest(candidates, column);
}

GapEstimate CapabilityGap(std::span<const double> model, const CommunicationGame& game,
                          std::size_t n, std::size_t trials, std::uint64_t seed, Metric metric) {
  RequireSpeakerSize(model, game);
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "need at least one candidate");
  std::vector<double> scores(model.size());
  for (std::size_t u = 0; u < scores.size(); ++u) scores[u] = ScoreUtterance(game, u, metric);

  GapEstimate gap;
  if (trials == 0) {
    // E[max of n iid scores] via P(max <= s) = F(s)^n over sorted scores.
    const Distribution p = Normalize(model);
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double expected_max = 0.0;
    double cdf = 0.0;
    double previous = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      cdf += p[order[k]];
      const bool last_of_level = k + 1 == order.size() || scores[order[k + 1]] != scores[order[k]];
      if (!last_of_level) continue;
      const double now = std::pow(std::min(cdf, 1.0), static_cast<double>(n));
      expected_max += scores[order[k]] * (now - previous);
      previous = now;
    }
    const double expected = std::inner_product(p.begin(), p.end(), scores.begin(), 0.0);
    gap.mean = expected_max - expected;
    return gap;
  }

  RunningMean stats;
  std::vector<std::size_t> candidates(n);
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng = DeriveStream(seed, i);
    for (std::size_t& c : candidates) c = rng.Categorical(model);
    const std::size_t oracle = PickBest(candidates, scores);
    stats.Add(scores[oracle] - scores[candidates[0]]);
  }
  gap.mean = stats.mean;
  gap.standard_error = stats.StandardError();
  gap.trials = trials;
  return gap;
}

DiagnosisReport Diagnose(const BpsSpeaker& model, const CommunicationGame& game,
                         const DiagnosisOptions& options) {
  if (options.n == 0) throw Error(ErrorKind::kInvalidArgument, "need at least one candidate");
  if (options.trials == 0) throw Error(ErrorKind::kInvalidArgument, "need at least one trial");
  if (model.base().utterances().size() != game.utterances().size()) {
    throw Error(ErrorKind::kInvalidArgument, "model and game disagree on |U|");
  }
  const std::size_t z = game.target_intention();
  const std::size_t c = game.context();
  const auto base = model.base().Row(z, c);
  const std::vector<double> tom = model.tom().Column(z, c);
  std::vector<double> scores(base.size());
  for (std::size_t u = 0; u < scores.size(); ++u) scores[u] = ScoreUtterance(game, u, options.metric);
  const std::vector<double> real = game.TargetColumn();

  DiagnosisReport report;
  report.trials = options.trials;
  report.n = options.n;
  report.seed = options.seed;
  report.epsilon = options.epsilon;
  report.metric = options.metric;

  RunningMean model_score;
  RunningMean pragmatic_score;
  std::vector<std::size_t> candidates(options.n);
  for (std::size_t i = 0; i < options.trials; ++i) {
    Rng rng = DeriveStream(options.seed, i);
    for (std::size_t& cand : candidates) cand = rng.Categorical(base);
    model_score.Add(scores[PickBest(candidates, tom)]);
    pragmatic_score.Add(scores[PickBest(candidates, real)]);
  }
  report.model_score = model_score.mean;
  report.oracle_pragmatic_score = pragmatic_score.mean;

  // Search oracle: the real posterior's n most probable utterances.
  const Distribution posterior = UpsDistribution(game);
  std::vector<std::size_t> order(posterior.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return posterior[a] > posterior[b]; });
  order.resize(std::min(options.n, order.size()));
  report.oracle_search_score = scores[PickBest(order, tom)];

  const std::vector<double> log_posterior = BpsLogWeights(model, z, c);
  if (LogSumExp(log_posterior) == -INFINITY) {
    throw Error(ErrorKind::kAllZeroWeights, "model's base speaker and ToM listener are disjoint");
  }
  report.oracle_inference_score = scores[ArgmaxLowest(log_posterior)];

  struct Candidate {
    Verdict verdict;
    double gap;
  };
  const Candidate ranked[] = {
      {Verdict::kPragmaticsLimited, report.pragmatic_gap()},
      {Verdict::kSearchLimited, report.search_gap()},
      {Verdict::kInferenceLimited, report.inference_gap()},
  };
  double best_gap = options.epsilon;
  for (const Candidate& cand : ranked) {
    if (cand.gap > best_gap) {
      best_gap = cand.gap;
      report.verdict = cand.verdict;
    }
  }
  return report;
}

}  // namespace bpslab
