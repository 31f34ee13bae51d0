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

#ifndef BPSLAB_DIAGNOSIS_H_
#define BPSLAB_DIAGNOSIS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "bpslab/game.h"
#include "bpslab/rng.h"
#include "bpslab/speakers.h"

namespace bpslab {

// How a chosen utterance is scored against the real listener.
enum class Metric {
  kListenerProbability,  // L_real(z* | u, c), graded
  kArgmaxSuccess,        // 1 if u maximizes L_real(z* | ., c), else 0
};

const char* MetricName(Metric metric);

double ScoreUtterance(const CommunicationGame& game, std::size_t utterance, Metric metric);

// E_{u ~ speaker}[score(u)]. trials == 0 enumerates exactly; otherwise a
// Monte-Carlo mean where trial i draws from Rng(seed + i).
double EvaluatePerformance(std::span<const double> speaker, const CommunicationGame& game,
                           std::size_t trials, std::uint64_t seed,
                           Metric metric = Metric::kListenerProbability);

// n candidates from the model's own distribution, ranked by the real
// listener (the human ranker): same search capability as the model,
// human-level pragmatics. Ties go to the lowest utterance index.
std::size_t OracleBestOfN(std::span<const double> speaker, const CommunicationGame& game,
                          std::size_t n, Rng& rng);

struct GapEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
};

// Oracle score minus model score. Each trial draws n candidates; the model
// outputs the first, the oracle the listener-best, so the per-trial gap is
// never negative. trials == 0 gives the exact value via the distribution of
// the maximum of n draws (standard error 0).
GapEstimate CapabilityGap(std::span<const double> model, const CommunicationGame& game,
                          std::size_t n, std::size_t trials, std::uint64_t seed,
                          Metric metric = Metric::kListenerProbability);

enum class Verdict { kSearchLimited, kPragmaticsLimited, kInferenceLimited, kAdequate };

const char* VerdictName(Verdict verdict);

struct DiagnosisOptions {
  std::size_t n = 8;
  std::size_t trials = 2000;
  std::uint64_t seed = 0;
  double epsilon = 0.02;
  Metric metric = Metric::kListenerProbability;
};

struct DiagnosisReport {
  // The model: n candidates from S_base, best by L_ToM.
  double model_score = 0.0;
  // Same candidates, best by L_real.
  double oracle_pragmatic_score = 0.0;
  // The n most probable utterances under the real listener's posterior,
  // best by L_ToM.
  double oracle_search_score = 0.0;
  // Exact argmax of S_base * L_ToM.
  double oracle_inference_score = 0.0;
  Verdict verdict = Verdict::kAdequate;
  std::size_t trials = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  Metric metric = Metric::kListenerProbability;

  double pragmatic_gap() const { return oracle_pragmatic_score - model_score; }
  double search_gap() const { return oracle_search_score - model_score; }
  double inference_gap() const { return oracle_inference_score - model_score; }
};

// Compares a BPS against three oracles that each repair one capability.
// The verdict names the largest gap exceeding epsilon (pragmatics, then
// search, then inference on exact ties), or kAdequate if none does.
// The search and inference oracles are by analogy with the pragmatic one.
DiagnosisReport Diagnose(const BpsSpeaker& model, const CommunicationGame& game,
                         const DiagnosisOptions& options);

}  // namespace bpslab

#endif  // BPSLAB_DIAGNOSIS_H_
