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

#include <algorithm>
#include <cmath>
#include <vector>

#include "bpslab/distribution.h"
#include "bpslab/game.h"
#include "bpslab/inference.h"
#include "bpslab/rng.h"
#include "bpslab/speakers.h"

namespace bpslab {
namespace {

CommunicationGame ColumnGame(const std::vector<double>& column) {
  Space u = Space::Indexed(SpaceKind::kUtterance, column.size(), "u");
  Space z = Space::Indexed(SpaceKind::kIntention, 2, "z");
  Space c(SpaceKind::kContext, {"default"});
  std::vector<double> table;
  for (double p : column) {
    table.push_back(p);
    table.push_back(1.0 - p);
  }
  return CommunicationGame(u, z, c, Conditional({u, c}, z, table), 0, 0);
}

std::vector<PreferenceDatum> Repeat(std::size_t a, std::size_t b, std::size_t a_wins,
                                    std::size_t b_wins) {
  std::vector<PreferenceDatum> out;
  for (std::size_t i = 0; i < a_wins; ++i) out.push_back({a, b, true});
  for (std::size_t i = 0; i < b_wins; ++i) out.push_back({a, b, false});
  return out;
}

TEST_CASE("balanced preferences give equal rewards") {
  const RewardFit fit = FitRewardFromPreferences(Repeat(0, 1, 50, 50), 2);
  CHECK(std::abs(fit.reward.values[0]) <= 1e-9);
  CHECK(fit.reward.values[1] == 0.0);
  CHECK(fit.unobserved.empty());
}

TEST_CASE("unanimous preferences stay finite") {
  const double reg = 1e-4;
  const RewardFit fit = FitRewardFromPreferences(Repeat(0, 1, 100, 0), 2, reg);
  const double gap = fit.reward.values[0] - fit.reward.values[1];
  // Oracle: the 1-D stationarity condition 100 * sigmoid(-d) = reg * d, by
  // bisection.
  double lo = 0.0, hi = 100.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f = -100.0 / (1.0 + std::exp(mid)) + reg * mid;
    (f < 0 ? lo : hi) = mid;
  }
  CHECK(std::isfinite(gap));
  CHECK(gap > 3.0);
  CHECK(gap == doctest::Approx(lo).epsilon(1e-8));
}

TEST_CASE("sigmoid(1) win rate recovers a unit gap") {
  const double e = std::exp(1.0);
  const CommunicationGame game = ColumnGame({e / (1 + e), 1 / (1 + e)});
  Rng rng(2024);
  const auto data = SamplePreferences(game, 100000, rng);
  const RewardFit fit = FitRewardFromPreferences(data, 2);
  CHECK(std::abs(fit.reward.values[0] - fit.reward.values[1] - 1.0) <= 0.05);
}

TEST_CASE("unobserved utterances are reported") {
  const RewardFit fit = FitRewardFromPreferences(Repeat(0, 1, 3, 1), 3);
  REQUIRE(fit.unobserved.size() == 1);
  CHECK(fit.unobserved[0] == 2);
  CHECK(fit.reward.values[2] == 0.0);
}

TEST_CASE("fit is permutation equivariant") {
  Rng rng(6);
  const std::size_t n = 5;
  std::vector<PreferenceDatum> data;
  for (int i = 0; i < 400; ++i) {
    std::size_t a = rng.UniformIndex(n), b = rng.UniformIndex(n - 1);
    if (b >= a) ++b;
    data.push_back({a, b, rng.Bernoulli(a < b ? 0.7 : 0.4)});
  }
  const std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
  std::vector<PreferenceDatum> permuted;
  for (const auto& d : data) permuted.push_back({perm[d.first], perm[d.second], d.first_wins});
  const auto r = FitRewardFromPreferences(data, n).reward.values;
  const auto rp = FitRewardFromPreferences(permuted, n).reward.values;
  // Compare gauge-free differences.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(std::abs((r[i] - r[j]) - (rp[perm[i]] - rp[perm[j]])) <= 1e-8);
    }
  }
}

TEST_CASE("sample_preferences examples") {
  Rng rng(10);
  CHECK(SamplePreferences(ColumnGame({0.5, 0.5}), 0, rng).empty());

  const auto equal = SamplePreferences(ColumnGame({0.5, 0.5}), 10000, rng);
  double first_rate = 0.0;
  for (const auto& d : equal) {
    CHECK(d.first != d.second);
    first_rate += d.winner() == 0;
  }
  CHECK(std::abs(first_rate / 10000.0 - 0.5) <= 0.02);

  const auto skew = SamplePreferences(ColumnGame({0.9, 0.1}), 10000, rng);
  double a_rate = 0.0;
  for (const auto& d : skew) a_rate += d.winner() == 0;
  CHECK(std::abs(a_rate / 10000.0 - 1.0 / (1.0 + std::exp(-std::log(9.0)))) <= 0.02);

  Rng x(3), y(3);
  const auto p = SamplePreferences(ColumnGame({0.2, 0.3, 0.5}), 50, x);
  const auto q = SamplePreferences(ColumnGame({0.2, 0.3, 0.5}), 50, y);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p[i].first == q[i].first);
    CHECK(p[i].second == q[i].second);
    CHECK(p[i].first_wins == q[i].first_wins);
  }
}

TEST_CASE("fitted reward reproduces the listener's ToM") {
  const CommunicationGame game = ColumnGame({0.6, 0.3, 0.1, 0.45});
  Rng rng(12);
  const auto data = SamplePreferences(game, 100000, rng);
  const RewardFit fit = FitRewardFromPreferences(data, 4);
  const auto fitted = TomFromReward(fit.reward).Column(0, 0);
  CHECK(TotalVariation(fitted, Normalize(game.TargetColumn())) <= 0.02);
}

}  // namespace
}  // namespace bpslab
