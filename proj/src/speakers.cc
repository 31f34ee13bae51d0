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

#include "bpslab/speakers.h"

#include <cmath>
#include <limits>
#include <string>

#include "bpslab/error.h"

namespace bpslab {
namespace {

void RequireSpeakerShape(const Conditional& dist) {
  if (dist.given().size() != 2 || dist.given()[0].kind() != SpaceKind::kIntention ||
      dist.given()[1].kind() != SpaceKind::kContext ||
      dist.target().kind() != SpaceKind::kUtterance) {
    throw ValidationError("speaker", "must be indexed by (intention, context) over utterances");
  }
}

}  // namespace

double RewardTable::Value(std::size_t utterance, std::size_t context) const {
  if (per_context) return (*per_context)[utterance * num_contexts + context];
  return values[utterance];
}

void RewardTable::Validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ValidationError("beta", "must be a positive finite number");
  }
  if (values.empty()) throw ValidationError("reward", "must have one value per utterance");
  for (std::size_t u = 0; u < values.size(); ++u) {
    if (!std::isfinite(values[u])) {
      throw ValidationError("reward[" + std::to_string(u) + "]", "must be finite");
    }
  }
  if (per_context) {
    if (per_context->size() != values.size() * num_contexts) {
      throw ValidationError("reward_per_context", "shape must be utterances x contexts");
    }
    for (double v : *per_context) {
      if (!std::isfinite(v)) throw ValidationError("reward_per_context", "must be finite");
    }
  }
}

BaseSpeaker::BaseSpeaker(Conditional dist) : dist_(std::move(dist)) {
  RequireSpeakerShape(dist_);
}

ToMListener::ToMListener(Space utterances, std::size_t num_contexts,
                         std::optional<std::size_t> num_intentions,
                         std::variant<Conditional, std::vector<double>, RewardTable> backing)
    : utterances_(std::move(utterances)),
      num_contexts_(num_contexts),
      num_intentions_(num_intentions),
      backing_(std::move(backing)) {}

ToMListener ToMListener::FromListener(Conditional listener) {
  if (listener.given().size() != 2 || listener.given()[0].kind() != SpaceKind::kUtterance ||
      listener.given()[1].kind() != SpaceKind::kContext ||
      listener.target().kind() != SpaceKind::kIntention) {
    throw ValidationError("tom_listener",
                          "must be indexed by (utterance, context) over intentions");
  }
  Space utterances = listener.given()[0];
  const std::size_t contexts = listener.given()[1].size();
  const std::size_t intentions = listener.target().size();
  return ToMListener(std::move(utterances), contexts, intentions, std::move(listener));
}

ToMListener ToMListener::FromLikelihood(Space utterances, Space intentions, Space contexts,
                                        std::vector<double> table) {
  const std::size_t n_u = utterances.size();
  const std::size_t columns = intentions.size() * contexts.size();
  if (table.size() != columns * n_u) {
    throw ValidationError("tom_likelihood", "shape must be (intentions x contexts) x utterances");
  }
  for (std::size_t col = 0; col < columns; ++col) {
    double mass = 0.0;
    for (std::size_t u = 0; u < n_u; ++u) {
      const double v = table[col * n_u + u];
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError("tom_likelihood[" + std::to_string(col) + "]",
                              "entries must be finite and non-negative");
      }
      mass += v;
    }
    if (!(mass > 0.0)) {
      throw ValidationError("tom_likelihood[" + std::to_string(col) + "]",
                            "column has no positive entry");
    }
  }
  return ToMListener(std::move(utterances), contexts.size(), intentions.size(),
                     std::move(table));
}

ToMListener ToMListener::FromReward(RewardTable reward, Space utterances, Space contexts) {
  reward.Validate();
  if (reward.num_utterances() != utterances.size()) {
    throw ValidationError("reward", "needs one value per utterance");
  }
  if (reward.per_context && reward.num_contexts != contexts.size()) {
    throw ValidationError("reward_per_context", "context count mismatch");
  }
  return ToMListener(std::move(utterances), contexts.size(), std::nullopt, std::move(reward));
}

std::optional<std::size_t> ToMListener::num_intentions() const { return num_intentions_; }

std::vector<double> ToMListener::LogColumn(std::size_t intention, std::size_t context) const {
  const std::size_t n_u = utterances_.size();
  if (context >= num_contexts_) throw Error(ErrorKind::kInvalidArgument, "context out of range");
  if (num_intentions_ && intention >= *num_intentions_) {
    throw Error(ErrorKind::kInvalidArgument, "intention out of range");
  }
  std::vector<double> out(n_u);
  if (const auto* table = std::get_if<Conditional>(&backing_)) {
    for (std::size_t u = 0; u < n_u; ++u) {
      const double p = table->Row({u, context})[intention];
      out[u] = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    }
  } else if (const auto* columns = std::get_if<std::vector<double>>(&backing_)) {
    const std::size_t offset = (intention * num_contexts_ + context) * n_u;
    for (std::size_t u = 0; u < n_u; ++u) {
      const double p = (*columns)[offset + u];
      out[u] = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    }
  } else {
    const auto& reward = std::get<RewardTable>(backing_);
    for (std::size_t u = 0; u < n_u; ++u) out[u] = reward.Value(u, context) / reward.beta;
    const double lse = LogSumExp(out);
    for (double& v : out) v -= lse;
  }
  return out;
}

std::vector<double> ToMListener::Column(std::size_t intention, std::size_t context) const {
  if (const auto* table = std::get_if<Conditional>(&backing_)) {
    std::vector<double> out(utterances_.size());
    for (std::size_t u = 0; u < out.size(); ++u) out[u] = table->Row({u, context})[intention];
    return out;
  }
  if (const auto* columns = std::get_if<std::vector<double>>(&backing_)) {
    const std::size_t n_u = utterances_.size();
    const auto first = columns->begin() + static_cast<std::ptrdiff_t>(
                                              (intention * num_contexts_ + context) * n_u);
    return std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n_u));
  }
  const std::vector<double> logs = LogColumn(intention, context);
  std::vector<double> out(logs.size());
  for (std::size_t u = 0; u < out.size(); ++u) out[u] = std::exp(logs[u]);
  return out;
}

BpsSpeaker::BpsSpeaker(BaseSpeaker base, ToMListener tom)
    : base_(std::move(base)), tom_(std::move(tom)) {
  if (tom_.utterances().size() != base_.utterances().size()) {
    throw ValidationError("tom_listener", "utterance count differs from base speaker");
  }
  if (tom_.num_contexts() != base_.contexts().size()) {
    throw ValidationError("tom_listener", "context count differs from base speaker");
  }
  if (tom_.num_intentions() && *tom_.num_intentions() != base_.intentions().size()) {
    throw ValidationError("tom_listener", "intention count differs from base speaker");
  }
}

std::vector<double> BpsLogWeights(const BpsSpeaker& speaker, std::size_t intention,
                                  std::size_t context) {
  const auto prior = speaker.base().Row(intention, context);
  std::vector<double> weights = speaker.tom().LogColumn(intention, context);
  for (std::size_t u = 0; u < weights.size(); ++u) {
    weights[u] = prior[u] > 0.0 ? weights[u] + std::log(prior[u])
                                : -std::numeric_limits<double>::infinity();
  }
  return weights;
}

Distribution BpsDistribution(const BpsSpeaker& speaker, std::size_t intention,
                             std::size_t context) {
  const std::vector<double> weights = BpsLogWeights(speaker, intention, context);
  try {
    return NormalizeLog(weights);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kAllZeroWeights) throw;
    throw Error(ErrorKind::kAllZeroWeights,
                "base speaker and ToM listener have disjoint support for intention '" +
                    speaker.base().intentions().symbol(intention) + "'");
  }
}

ToMListener TomFromReward(const RewardTable& reward) {
  return TomFromReward(reward,
                       Space::Indexed(SpaceKind::kUtterance, reward.num_utterances(), "u"),
                       Space::Indexed(SpaceKind::kContext, reward.num_contexts, "c"));
}

ToMListener TomFromReward(const RewardTable& reward, const Space& utterances,
                          const Space& contexts) {
  return ToMListener::FromReward(reward, utterances, contexts);
}

BpsSpeaker TrivialBpsFromLm(const Conditional& lm) {
  BaseSpeaker base(lm);
  ToMListener tom = ToMListener::FromLikelihood(base.utterances(), base.intentions(),
                                                base.contexts(), lm.table());
  return BpsSpeaker(std::move(base), std::move(tom));
}

}  // namespace bpslab
