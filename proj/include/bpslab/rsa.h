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

#ifndef BPSLAB_RSA_H_
#define BPSLAB_RSA_H_

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "bpslab/conditional.h"
#include "bpslab/distribution.h"
#include "bpslab/space.h"
#include "bpslab/speakers.h"

namespace bpslab {

// Boolean truth table, utterances x referents. Referents play the role of
// intentions.
class Lexicon {
 public:
  // `truth[u * |referents| + z]` is nonzero when utterance u is literally
  // true of referent z. Throws ValidationError if some utterance is true of
  // nothing or some referent has no true utterance.
  Lexicon(Space utterances, Space referents, std::vector<char> truth);

  // From (utterance, true referents) pairs in utterance order; referents
  // are ordered by `referent_order` when given, else by first appearance.
  static Lexicon FromEntries(
      const std::vector<std::pair<std::string, std::vector<std::string>>>& entries,
      const std::vector<std::string>& referent_order = {});

  const Space& utterances() const { return utterances_; }
  const Space& referents() const { return referents_; }
  bool Truth(std::size_t utterance, std::size_t referent) const {
    return truth_[utterance * referents_.size() + referent] != 0;
  }
  const std::vector<char>& truth() const { return truth_; }

 private:
  Space utterances_;
  Space referents_;
  std::vector<char> truth_;
};

struct RsaConfig {
  double alpha = 1.0;
  Distribution prior;  // over referents

  // Throws ValidationError unless alpha is finite and >= 0 and the prior is
  // a distribution of the right size.
  void Validate(const Lexicon& lexicon) const;
};

// Single-element context space used where RSA has no notion of context.
Space RsaContextSpace();

// L0(z | u) proportional to truth(u, z) prior(z). Given {utterances},
// target referents. Throws kAllZeroWeights if the prior excludes every
// referent an utterance is true of.
Conditional LiteralListener(const Lexicon& lexicon, const Distribution& prior);

// S1(u | z) proportional to exp(alpha log L0(z | u)); utterances with
// L0 = 0 get probability zero for every alpha, including alpha = 0.
// Given {referents}, target utterances.
Conditional PragmaticSpeaker(const Conditional& literal_listener, double alpha);

// L1(z | u) proportional to S1(u | z) prior(z).
Conditional PragmaticListener(const Conditional& pragmatic_speaker, const Distribution& prior);

// The RSA speaker written as a BPS: the base speaker is uniform over the
// utterances literally true of the referent, the ToM listener is L0 (raised
// to alpha when alpha != 1). For alpha = 1 its posterior equals S1.
BpsSpeaker RsaAsBps(const Lexicon& lexicon, const RsaConfig& config);

}  // namespace bpslab

#endif  // BPSLAB_RSA_H_
