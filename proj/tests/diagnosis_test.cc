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

#include "bpslab/diagnosis.h"
#include "bpslab/distribution.h"
#include "bpslab/error.h"
#include "bpslab/game.h"
#include "bpslab/rng.h"
#include "diagnosis_families.h"

namespace bpslab {
namespace {

using testing::GameWithColumn;

CommunicationGame ColumnGame(const std::vector<double>& column) {
  Rng rng(0);
  return GameWithColumn(column, rng);
}

TEST_CASE("evaluate_performance examples") {
  const CommunicationGame g3 = ColumnGame({0.2, 0.7, 0.4});
  CHECK(EvaluatePerformance(std::vector<double>{0, 1, 0}, g3, 0, 0) == doctest::Approx(0.7));
  CHECK(EvaluatePerformance(std::vector<double>{0, 1, 0}, g3, 50, 3) == doctest::Approx(0.7));
  const CommunicationGame g2 = ColumnGame({0.8, 0.2});
  CHECK(EvaluatePerformance(std::vector<double>{0.5, 0.5}, g2, 0, 0) ==
        doctest::Approx(0.5).epsilon(1e-12));
  // 0.8^2 + 0.2^2 over a column sum of 1.
  CHECK(EvaluatePerformance(UpsDistribution(g2), g2, 0, 0) == doctest::Approx(0.68).epsilon(1e-12));
  CHECK(std::abs(EvaluatePerformance(std::vector<double>{0.5, 0.5}, g2, 20000, 1) - 0.5) <= 0.01);
  CHECK(EvaluatePerformance(std::vector<double>{0.5, 0.5}, g2, 0, 0, Metric::kArgmaxSuccess) ==
        doctest::Approx(0.5));
}

TEST_CASE("oracle_best_of_n examples") {
  const CommunicationGame g = ColumnGame({0.1, 0.9, 0.5, 0.3});
  const std::vector<double> uniform(4, 0.25);
  Rng a(5), b(5);
  CHECK(OracleBestOfN(uniform, g, 1, a) == b.Categorical(uniform));
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    CHECK(OracleBestOfN(std::vector<double>{0, 0, 1, 0}, g, 7, rng) == 2);
  }
  // With n = |U| draws, the pick is the best of the sampled support.
  for (int t = 0; t < 50; ++t) {
    Rng r1(100 + t), r2(100 + t);
    std::vector<std::size_t> drawn;
    for (int i = 0; i < 4; ++i) drawn.push_back(r2.Categorical(uniform));
    std::size_t best = drawn[0];
    for (std::size_t d : drawn) {
      if (g.TargetColumn()[d] > g.TargetColumn()[best]) best = d;
    }
    CHECK(OracleBestOfN(uniform, g, 4, r1) == best);
  }
}

TEST_CASE("capability_gap examples") {
  const CommunicationGame g = ColumnGame({0.9, 0.1});
  const GapEstimate mc = CapabilityGap(std::vector<double>{0.5, 0.5}, g, 2, 10000, 0);
  CHECK(std::abs(mc.mean - 0.2) <= 0.02);
  // Exact: 0.25 * 0.1 + 0.75 * 0.9 - 0.5.
  CHECK(CapabilityGap(std::vector<double>{0.5, 0.5}, g, 2, 0, 0).mean ==
        doctest::Approx(0.2).epsilon(1e-12));
  CHECK(CapabilityGap(std::vector<double>{0.5, 0.5}, g, 1, 10000, 0).mean == 0.0);
  // A model that already plays the exact argmax.
  const CommunicationGame h = ColumnGame({0.3, 0.8, 0.5});
  CHECK(CapabilityGap(std::vector<double>{0, 1, 0}, h, 5, 1000, 0).mean == 0.0);
  CHECK(CapabilityGap(std::vector<double>{0, 1, 0}, h, 5, 0, 0).mean == doctest::Approx(0.0));
}

TEST_CASE("capability_gap is non-negative and grows with n") {
  Rng rng(21);
  for (int t = 0; t < 30; ++t) {
    std::vector<double> column(2 + rng.UniformIndex(6)), model(column.size());
    for (double& x : column) x = rng.Uniform();
    for (double& x : model) x = 0.05 + rng.Uniform();
    const CommunicationGame g = ColumnGame(column);
    double previous = -1.0;
    for (std::size_t n : {1, 2, 4, 8}) {
      const GapEstimate gap = CapabilityGap(model, g, n, 2000, 50 + t);
      CHECK(gap.mean >= -2.0 * gap.standard_error);
      const double exact = CapabilityGap(model, g, n, 0, 0).mean;
      CHECK(exact >= previous - 1e-12);
      previous = exact;
    }
  }
}

TEST_CASE("diagnose verdicts on planted families") {
  DiagnosisOptions options;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (auto make : {testing::SearchLimited, testing::PragmaticsLimited, testing::Adequate,
                      testing::InferenceLimited}) {
      const testing::Instance inst = make(seed);
      options.n = inst.n;
      options.seed = seed;
      const DiagnosisReport r = Diagnose(inst.model, inst.game, options);
      CHECK_MESSAGE(r.verdict == inst.planted, "seed ", seed, " planted ",
                    VerdictName(inst.planted), " got ", VerdictName(r.verdict));
      for (double s : {r.model_score, r.oracle_pragmatic_score, r.oracle_search_score,
                       r.oracle_inference_score}) {
        CHECK((s >= 0.0 && s <= 1.0));
      }
    }
  }
}

TEST_CASE("diagnose is reproducible and validates options") {
  const testing::Instance inst = testing::SearchLimited(3);
  DiagnosisOptions options;
  options.n = inst.n;
  const DiagnosisReport a = Diagnose(inst.model, inst.game, options);
  const DiagnosisReport b = Diagnose(inst.model, inst.game, options);
  CHECK(a.model_score == b.model_score);
  CHECK(a.oracle_pragmatic_score == b.oracle_pragmatic_score);
  options.trials = 0;
  CHECK_THROWS(Diagnose(inst.model, inst.game, options));
  options.trials = 10;
  options.n = 0;
  CHECK_THROWS(Diagnose(inst.model, inst.game, options));
}

TEST_CASE("verdict names") {
  CHECK(std::string(VerdictName(Verdict::kSearchLimited)) == "search-limited");
  CHECK(std::string(VerdictName(Verdict::kPragmaticsLimited)) == "pragmatics-limited");
  CHECK(std::string(VerdictName(Verdict::kInferenceLimited)) == "inference-limited");
  CHECK(std::string(VerdictName(Verdict::kAdequate)) == "adequate");
}

}  // namespace
}  // namespace bpslab
