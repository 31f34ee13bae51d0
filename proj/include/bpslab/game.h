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

#ifndef BPSLAB_GAME_H_
#define BPSLAB_GAME_H_

#include <cstddef>
#include <span>
#include <vector>

#include "bpslab/conditional.h"
#include "bpslab/distribution.h"
#include "bpslab/space.h"

namespace bpslab {

// A speaker must pick an utterance so that the real listener recovers the
// target intention in the given context.
class CommunicationGame {
 public:
  // `listener` is L_real(z | u, c): given {utterances, contexts}, target
  // intentions.
  CommunicationGame(Space utterances, Space intentions, Space contexts,
                    Conditional listener, std::size_t target_intention,
                    std::size_t context);

  const Space& utterances() const { return utterances_; }
  const Space& intentions() const { return intentions_; }
  const Space& contexts() const { return contexts_; }
  const Conditional& listener() const { return listener_; }
  std::size_t target_intention() const { return target_intention_; }
  std::size_t context() const { return context_; }

  double ListenerProb(std::size_t intention, std::size_t utterance,
                      std::size_t context) const;

  // L_real(z* | u, c) for every u.
  std::vector<double> TargetColumn() const;

  // Same game with a different target or context.
  CommunicationGame WithTask(std::size_t target_intention, std::size_t context) const;

 private:
  Space utterances_;
  Space intentions_;
  Space contexts_;
  Conditional listener_;
  std::size_t target_intention_;
  std::size_t context_;
};

// Listener-optimal utterance for the given per-utterance scores; ties go to
// the lowest index. Throws kEmptyUtteranceSpace on empty scores and
// kInvalidArgument on a length mismatch.
std::size_t SolveExact(const CommunicationGame& game, std::span<const double> scores);

// SolveExact on the game's own target column.
std::size_t SolveExact(const CommunicationGame& game);

// Unbounded pragmatic speaker: S_ups(u) proportional to L_real(z* | u, c).
// Throws kAllZeroWeights when no utterance conveys z*.
Distribution UpsDistribution(const CommunicationGame& game);

}  // namespace bpslab

#endif  // BPSLAB_GAME_H_
