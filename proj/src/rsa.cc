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

#include "bpslab/rsa.h"

#include <cmath>

#include "bpslab/error.h"

namespace bpslab {

Lexicon::Lexicon(Space utterances, Space referents, std::vector<char> truth)
    : utterances_(std::move(utterances)),
      referents_(std::move(referents)),
      truth_(std::move(truth)) {
  const std::size_t n_u = utterances_.size();
  const std::size_t n_z = referents_.size();
  if (truth_.size() != n_u * n_z) throw ValidationError("lexicon", "truth table has wrong shape");
  for (std::size_t u = 0; u < n_u; ++u) {
    bool any = false;
    for (std::size_t z = 0; z < n_z; ++z) any = any || Truth(u, z);
    if (!any) {
      throw ValidationError("lexicon." + utterances_.symbol(u), "utterance is true of no referent");
    }
  }
  for (std::size_t z = 0; z < n_z; ++z) {
    bool any = false;
    for (std::size_t u = 0; u < n_u; ++u) any = any || Truth(u, z);
    if (!any) {
      throw ValidationError("lexicon", "referent '" + referents_.symbol(z) +
                                           "' is not described by any utterance");
    }
  }
}

Lexicon Lexicon::FromEntries(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& entries,
    const std::vector<std::string>& referent_order) {
  std::vector<std::string> utterances;
  std::vector<std::string> referents = referent_order;
  for (const auto& [utterance, true_of] : entries) {
    utterances.push_back(utterance);
    if (!referent_order.empty()) continue;
    for (const std::string& r : true_of) {
      bool seen = false;
      for (const std::string& known : referents) seen = seen || known == r;
      if (!seen) referents.push_back(r);
    }
  }
  Space utterance_space(SpaceKind::kUtterance, std::move(utterances));
  Space referent_space(SpaceKind::kIntention, std::move(referents));
  std::vector<char> truth(utterance_space.size() * referent_space.size(), 0);
  for (std::size_t u = 0; u < entries.size(); ++u) {
    for (const std::string& r : entries[u].second) {
      const auto z = referent_space.IndexOf(r);
      if (!z) throw ValidationError("lexicon." + entries[u].first, "unknown referent '" + r + "'");
      truth[u * referent_space.size() + *z] = 1;
    }
  }
  return Lexicon(std::move(utterance_space), std::move(referent_space), std::move(truth));
}

void RsaConfig::Validate(const Lexicon& lexicon) const {
  if (!std::isfinite(alpha) || alpha < 0.0) throw ValidationError("alpha", "must be finite and >= 0");
  if (prior.size() != lexicon.referents().size()) {
    throw ValidationError("prior", "needs one entry per referent");
  }
  double sum = 0.0;
  for (double p : prior) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("prior", "entries must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance) throw ValidationError("prior", "must sum to 1");
}

Space RsaContextSpace() { return Space(SpaceKind::kContext, {"default"}); }

Conditional LiteralListener(const Lexicon& lexicon, const Distribution& prior) {
  const std::size_t n_u = lexicon.utterances().size();
  const std::size_t n_z = lexicon.referents().size();
  if (prior.size() != n_z) throw Error(ErrorKind::kInvalidArgument, "prior size mismatch");
  std::vector<double> table;
  table.reserve(n_u * n_z);
  std::vector<double> weights(n_z);
  for (std::size_t u = 0; u < n_u; ++u) {
    for (std::size_t z = 0; z < n_z; ++z) weights[z] = lexicon.Truth(u, z) ? prior[z] : 0.0;
    const Distribution row = Normalize(weights);
    table.insert(table.end(), row.begin(), row.end());
  }
  return Conditional({lexicon.utterances()}, lexicon.referents(), std::move(table));
}

Conditional PragmaticSpeaker(const Conditional& literal_listener, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::kInvalidArgument, "alpha must be finite and >= 0");
  }
  const Space& utterances = literal_listener.given().at(0);
  const Space& referents = literal_listener.target();
  std::vector<double> table;
  table.reserve(utterances.size() * referents.size());
  std::vector<double> log_weights(utterances.size());
  for (std::size_t z = 0; z < referents.size(); ++z) {
    for (std::size_t u = 0; u < utterances.size(); ++u) {
      const double p = literal_listener.At(u, z);
      log_weights[u] = p > 0.0 ? alpha * std::log(p) : -INFINITY;
    }
    Distribution row;
    try {
      row = NormalizeLog(log_weights);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kAllZeroWeights) throw;
      throw Error(ErrorKind::kAllZeroWeights,
                  "referent '" + referents.symbol(z) + "' has no describing utterance");
    }
    table.insert(table.end(), row.begin(), row.end());
  }
  return Conditional({referents}, utterances, std::move(table));
}

Conditional PragmaticListener(const Conditional& pragmatic_speaker, const Distribution& prior) {
  const Space& referents = pragmatic_speaker.given().at(0);
  const Space& utterances = pragmatic_speaker.target();
  std::vector<double> table;
  std::vector<double> weights(referents.size());
  for (std::size_t u = 0; u < utterances.size(); ++u) {
    for (std::size_t z = 0; z < referents.size(); ++z) {
      weights[z] = pragmatic_speaker.At(z, u) * prior.at(z);
    }
    const Distribution row = Normalize(weights);
    table.insert(table.end(), row.begin(), row.end());
  }
  return Conditional({utterances}, referents, std::move(table));
}

BpsSpeaker RsaAsBps(const Lexicon& lexicon, const RsaConfig& config) {
  config.Validate(lexicon);
  const Space contexts = RsaContextSpace();
  const std::size_t n_u = lexicon.utterances().size();
  const std::size_t n_z = lexicon.referents().size();

  std::vector<double> base_table;
  base_table.reserve(n_z * n_u);
  std::vector<double> truth_row(n_u);
  for (std::size_t z = 0; z < n_z; ++z) {
    for (std::size_t u = 0; u < n_u; ++u) truth_row[u] = lexicon.Truth(u, z) ? 1.0 : 0.0;
    const Distribution row = Normalize(truth_row);
    base_table.insert(base_table.end(), row.begin(), row.end());
  }
  BaseSpeaker base(Conditional({lexicon.referents(), contexts}, lexicon.utterances(),
                               std::move(base_table)));

  const Conditional l0 = LiteralListener(lexicon, config.prior);
  if (config.alpha == 1.0) {
    Conditional tom_table({lexicon.utterances(), contexts}, lexicon.referents(), l0.table());
    return BpsSpeaker(std::move(base), ToMListener::FromListener(std::move(tom_table)));
  }
  // Tempered: likelihood columns L0(z | u)^alpha, zero where L0 is zero.
  std::vector<double> columns(n_z * n_u, 0.0);
  for (std::size_t z = 0; z < n_z; ++z) {
    for (std::size_t u = 0; u < n_u; ++u) {
      const double p = l0.At(u, z);
      columns[z * n_u + u] = p > 0.0 ? std::pow(p, config.alpha) : 0.0;
    }
  }
  return BpsSpeaker(std::move(base),
                    ToMListener::FromLikelihood(lexicon.utterances(), lexicon.referents(),
                                                contexts, std::move(columns)));
}

}  // namespace bpslab
