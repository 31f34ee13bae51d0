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
#include "bpslab/game.h"
#include "bpslab/rng.h"
#include "bpslab/speakers.h"

namespace bpslab {
namespace {

const Space kContext(SpaceKind::kContext, {"default"});

// Single-intention speaker with one row.
BaseSpeaker RowSpeaker(const std::vector<double>& row) {
  Space u = Space::Indexed(SpaceKind::kUtterance, row.size(), "u");
  Space z = Space::Indexed(SpaceKind::kIntention, 1, "z");
  return BaseSpeaker(Conditional({z, kContext}, u, row));
}

ToMListener LikelihoodTom(const std::vector<double>& column) {
  return ToMListener::FromLikelihood(Space::Indexed(SpaceKind::kUtterance, column.size(), "u"),
                                     Space::Indexed(SpaceKind::kIntention, 1, "z"), kContext,
                                     column);
}

void CheckClose(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= tol);
}

TEST_CASE("bps_distribution examples") {
  CheckClose(BpsDistribution(BpsSpeaker(RowSpeaker({0.5, 0.5}), LikelihoodTom({0.8, 0.2})), 0, 0),
             {0.8, 0.2}, 1e-12);
  CheckClose(BpsDistribution(BpsSpeaker(RowSpeaker({0.9, 0.1}), LikelihoodTom({0.5, 0.5})), 0, 0),
             {0.9, 0.1}, 1e-12);
  // Oracle: products 0.6*0.2 and 0.4*0.8, divided by their sum.
  const double a = 0.6 * 0.2, b = 0.4 * 0.8;
  CheckClose(BpsDistribution(BpsSpeaker(RowSpeaker({0.6, 0.4}), LikelihoodTom({0.2, 0.8})), 0, 0),
             {a / (a + b), b / (a + b)}, 1e-12);
  CheckClose({a / (a + b), b / (a + b)}, {3.0 / 11, 8.0 / 11}, 1e-15);
}

TEST_CASE("bps_distribution with disjoint support fails") {
  BpsSpeaker s(RowSpeaker({1.0, 0.0}), LikelihoodTom({0.0, 1.0}));
  try {
    BpsDistribution(s, 0, 0);
    FAIL("expected AllZeroWeights");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kAllZeroWeights);
  }
}

TEST_CASE("bps support is contained in base support") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.UniformIndex(10);
    std::vector<double> base(n), like(n);
    for (std::size_t i = 0; i < n; ++i) {
      base[i] = rng.Bernoulli(0.3) ? 0.0 : rng.Uniform();
      like[i] = 0.01 + rng.Uniform();
    }
    base[0] = 0.5;
    const auto p = BpsDistribution(BpsSpeaker(RowSpeaker(Normalize(base)), LikelihoodTom(like)), 0, 0);
    for (std::size_t i = 0; i < n; ++i) CHECK((p[i] == 0.0) == (base[i] == 0.0));
  }
}

TEST_CASE("uniform base with the real listener equals ups") {
  Space u = Space::Indexed(SpaceKind::kUtterance, 3, "u");
  Space z = Space::Indexed(SpaceKind::kIntention, 2, "z");
  Conditional listener({u, kContext}, z, {0.7, 0.3, 0.2, 0.8, 0.5, 0.5});
  CommunicationGame game(u, z, kContext, listener, 1, 0);
  BaseSpeaker base(Conditional({z, kContext}, u, std::vector<double>(6, 1.0 / 3)));
  BpsSpeaker s(base, ToMListener::FromListener(listener));
  CheckClose(BpsDistribution(s, 1, 0), UpsDistribution(game), 1e-12);
}

TEST_CASE("tom_from_reward examples") {
  RewardTable zero{{0.0, 0.0}, 3.7};
  CheckClose(TomFromReward(zero).Column(0, 0), {0.5, 0.5}, 1e-15);
  RewardTable ln2{{std::log(2.0), 0.0}, 1.0};
  CheckClose(TomFromReward(ln2).Column(0, 0), {2.0 / 3, 1.0 / 3}, 1e-12);
  RewardTable hot{{5.0, 1.0}, 1e6};
  CheckClose(TomFromReward(hot).Column(0, 0), {0.5, 0.5}, 1e-5);
  RewardTable big{{1000.0, 999.0}, 1.0};
  const auto col = TomFromReward(big).Column(0, 0);
  CHECK(col[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("tom_from_reward is shift invariant") {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    RewardTable r;
    r.values.resize(2 + rng.UniformIndex(8));
    for (double& v : r.values) v = 4.0 * rng.Uniform() - 2.0;
    r.beta = 0.5 + rng.Uniform();
    RewardTable shifted = r;
    const double k = 100.0 * rng.Uniform() - 50.0;
    for (double& v : shifted.values) v += k;
    CheckClose(TomFromReward(r).Column(0, 0), TomFromReward(shifted).Column(0, 0), 1e-12);
  }
}

TEST_CASE("reward table validation") {
  RewardTable bad{{1.0}, 0.0};
  CHECK_THROWS_AS(bad.Validate(), ValidationError);
  RewardTable nan{{NAN}, 1.0};
  CHECK_THROWS_AS(nan.Validate(), ValidationError);
}

TEST_CASE("trivial_bps_from_lm examples") {
  auto bps_of = [](const std::vector<double>& row) {
    return BpsDistribution(TrivialBpsFromLm(RowSpeaker(row).dist()), 0, 0);
  };
  CheckClose(bps_of({0.5, 0.5}), {0.5, 0.5}, 1e-12);
  CheckClose(bps_of({0.9, 0.1}), {0.81 / 0.82, 0.01 / 0.82}, 1e-12);
  CHECK(bps_of({0.9, 0.1})[0] == doctest::Approx(0.98780).epsilon(1e-5));
  Rng rng(100);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> w(2 + rng.UniformIndex(15));
    for (double& x : w) x = rng.Uniform();
    const auto lm = Normalize(w);
    const auto p = bps_of(lm);
    CHECK(ArgmaxLowest(lm) == ArgmaxLowest(p));
    // Squaring oracle.
    std::vector<double> sq(lm.size());
    for (std::size_t i = 0; i < lm.size(); ++i) sq[i] = lm[i] * lm[i];
    CheckClose(p, Normalize(sq), 1e-12);
  }
}

TEST_CASE("bps speaker dimension checks") {
  CHECK_THROWS(BpsSpeaker(RowSpeaker({0.5, 0.5}), LikelihoodTom({0.2, 0.3, 0.5})));
}

}  // namespace
}  // namespace bpslab
