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

#ifndef BPSLAB_SPEAKERS_H_
#define BPSLAB_SPEAKERS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "bpslab/conditional.h"
#include "bpslab/distribution.h"
#include "bpslab/space.h"

namespace bpslab {

// Per-utterance reward R(u) with inverse temperature beta. The listener it
// induces is L_ToM(z* | u, c) proportional to exp(R(u) / beta); beta = 1
// gives the plain exp(R(u)) reranker form.
//
// `per_context`, when set, holds R(u, c) at [u * num_contexts + c] and
// overrides `values`. This is an experimental extension: the standard
// reward sees the utterance only.
struct RewardTable {
  std::vector<double> values;
  double beta = 1.0;
  std::optional<std::vector<double>> per_context = std::nullopt;
  std::size_t num_contexts = 1;

  std::size_t num_utterances() const { return values.size(); }
  double Value(std::size_t utterance, std::size_t context) const;
  // Throws ValidationError when beta <= 0 or any value is non-finite.
  void Validate() const;
};

// Prior over utterances S_base(u | z, c): given {intentions, contexts},
// target utterances. Zero entries are allowed.
class BaseSpeaker {
 public:
  explicit BaseSpeaker(Conditional dist);

  const Conditional& dist() const { return dist_; }
  const Space& utterances() const { return dist_.target(); }
  const Space& intentions() const { return dist_.given()[0]; }
  const Space& contexts() const { return dist_.given()[1]; }
  std::span<const double> Row(std::size_t intention, std::size_t context) const {
    return dist_.Row({intention, context});
  }

 private:
  Conditional dist_;
};

// The speaker's model of the listener, queried through its likelihood
// column: L_ToM(z | ., c) as a function of the utterance. Only the shape of
// the column matters downstream, so columns are defined up to scale.
//
// Three backings:
//  - a full listener table L(z | u, c);
//  - explicit non-negative likelihood columns, one per (z, c);
//  - a reward table. This form describes only the target intention's row:
//    the same column is returned whatever intention is asked for, and it is
//    the caller's job to ask only about the target.
class ToMListener {
 public:
  // `listener`: given {utterances, contexts}, target intentions.
  static ToMListener FromListener(Conditional listener);
  // `table` holds columns at [(z * |C| + c) * |U| + u]; non-negative, each
  // column with positive mass.
  static ToMListener FromLikelihood(Space utterances, Space intentions, Space contexts,
                                    std::vector<double> table);
  static ToMListener FromReward(RewardTable reward, Space utterances, Space contexts);

  bool reward_backed() const { return std::holds_alternative<RewardTable>(backing_); }
  const Space& utterances() const { return utterances_; }
  std::size_t num_contexts() const { return num_contexts_; }
  std::optional<std::size_t> num_intentions() const;

  // Column over utterances. Reward-backed columns are the materialized
  // softmax of R(., c) / beta and sum to one.
  std::vector<double> Column(std::size_t intention, std::size_t context) const;
  // log Column, with log 0 = -inf.
  std::vector<double> LogColumn(std::size_t intention, std::size_t context) const;

  const Conditional* listener() const { return std::get_if<Conditional>(&backing_); }
  const RewardTable* reward() const { return std::get_if<RewardTable>(&backing_); }
  const std::vector<double>* likelihood() const {
    return std::get_if<std::vector<double>>(&backing_);
  }

 private:
  ToMListener(Space utterances, std::size_t num_contexts,
              std::optional<std::size_t> num_intentions,
              std::variant<Conditional, std::vector<double>, RewardTable> backing);

  Space utterances_;
  std::size_t num_contexts_;
  std::optional<std::size_t> num_intentions_;
  std::variant<Conditional, std::vector<double>, RewardTable> backing_;
};

// A bounded pragmatic speaker: a base speaker (search) plus a ToM listener
// (pragmatics). Throws ValidationError when their dimensions disagree.
class BpsSpeaker {
 public:
  BpsSpeaker(BaseSpeaker base, ToMListener tom);

  const BaseSpeaker& base() const { return base_; }
  const ToMListener& tom() const { return tom_; }

 private:
  BaseSpeaker base_;
  ToMListener tom_;
};

// Unnormalized log posterior log S_base(u|z,c) + log L_ToM(z|u,c).
std::vector<double> BpsLogWeights(const BpsSpeaker& speaker, std::size_t intention,
                                  std::size_t context);

// S_bps(u | z*, c) proportional to S_base(u | z*, c) L_ToM(z* | u, c),
// computed in log space; zero exactly where the base speaker is zero.
// Throws kAllZeroWeights when prior and likelihood have disjoint support.
Distribution BpsDistribution(const BpsSpeaker& speaker, std::size_t intention,
                             std::size_t context);

// Reward-backed ToM listener. Utterance and context spaces default to
// indexed placeholders sized from the table.
ToMListener TomFromReward(const RewardTable& reward);
ToMListener TomFromReward(const RewardTable& reward, const Space& utterances,
                          const Space& contexts);

// A language model S(u | z, c) seen as a BPS that uses itself twice: as the
// base speaker and, column-wise, as the ToM likelihood. The resulting
// posterior is proportional to S(u | z, c)^2 and has the same argmax.
BpsSpeaker TrivialBpsFromLm(const Conditional& lm);

}  // namespace bpslab

#endif  // BPSLAB_SPEAKERS_H_
