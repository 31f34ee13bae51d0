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

#ifndef BPSLAB_SPEC_IO_H_
#define BPSLAB_SPEC_IO_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "bpslab/feedback.h"
#include "bpslab/game.h"
#include "bpslab/rsa.h"
#include "bpslab/speakers.h"

namespace bpslab {

// Everything a spec file may hold. Each part is optional; speaker tables and
// rewards need the game's spaces.
struct SpecFile {
  std::optional<CommunicationGame> game;
  std::optional<BaseSpeaker> base_speaker;   // "base_speaker" [c][z][u]
  std::optional<ToMListener> tom_listener;   // "tom_listener" [c][u][z]
  std::optional<RewardTable> reward;         // "reward" [u] or "reward_per_context" [c][u]
  std::optional<Lexicon> lexicon;            // "lexicon" {utterance: [referents]}
  std::optional<RsaConfig> rsa;              // "prior", "alpha"
  std::optional<FeedbackTaskConfig> feedback_task;
};

// Throws Error(kParse) on malformed JSON and ValidationError with a JSON
// path (e.g. "$.listener[0][1]") on the first violated invariant.
SpecFile ParseSpec(std::string_view text);
SpecFile LoadSpec(const std::filesystem::path& path);

// Pretty-printed JSON that ParseSpec reads back to identical tables.
std::string SerializeSpec(const SpecFile& spec);

}  // namespace bpslab

#endif  // BPSLAB_SPEC_IO_H_
