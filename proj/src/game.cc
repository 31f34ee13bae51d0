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

#include "bpslab/game.h"

#include "bpslab/error.h"

namespace bpslab {

CommunicationGame::CommunicationGame(Space utterances, Space intentions, Space contexts,
                                     Conditional listener, std::size_t target_intention,
                                     std::size_t context)
    : utterances_(std::move(utterances)),
      intentions_(std::move(intentions)),
      contexts_(std::move(contexts)),
      listener_(std::move(listener)),
      target_intention_(target_intention),
      context_(context) {
  if (listener_.given().size() != 2 || listener_.given()[0] != utterances_ ||
      listener_.given()[1] != contexts_ || listener_.target() != intentions_) {
    throw ValidationError("listener",
                          "must be indexed by (utterance, context) over intentions");
  }
  if (target_intention_ >= intentions_.size()) {
    throw ValidationError("target_intention", "index out of range");
  }
  if (context_ >= contexts_.size()) throw ValidationError("context", "index out of range");
}

double CommunicationGame::ListenerProb(std::size_t intention, std::size_t utterance,
                                       std::size_t context) const {
  return listener_.Row({utterance, context})[intention];
}

std::vector<double> CommunicationGame::TargetColumn() const {
  std::vector<double> column(utterances_.size());
  for (std::size_t u = 0; u < column.size(); ++u) {
    column[u] = ListenerProb(target_intention_, u, context_);
  }
  return column;
}

CommunicationGame CommunicationGame::WithTask(std::size_t target_intention,
                                              std::size_t context) const {
  return CommunicationGame(utterances_, intentions_, contexts_, listener_, target_intention,
                           context);
}

std::size_t SolveExact(const CommunicationGame& game, std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorKind::kEmptyUtteranceSpace, "no utterances to choose from");
  if (scores.size() != game.utterances().size()) {
    throw Error(ErrorKind::kInvalidArgument, "one score per utterance required");
  }
  return ArgmaxLowest(scores);
}

std::size_t SolveExact(const CommunicationGame& game) {
  const std::vector<double> column = game.TargetColumn();
  return SolveExact(game, column);
}

Distribution UpsDistribution(const CommunicationGame& game) {
  const std::vector<double> column = game.TargetColumn();
  try {
    return Normalize(column);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kAllZeroWeights) throw;
    throw Error(ErrorKind::kAllZeroWeights,
                "no utterance lets the listener infer '" +
                    game.intentions().symbol(game.target_intention()) + "' (unwinnable game)");
  }
}

}  // namespace bpslab
