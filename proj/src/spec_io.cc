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

#include "bpslab/spec_io.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "bpslab/error.h"

namespace bpslab {
namespace {

using Json = nlohmann::ordered_json;

std::string Index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const Json& Require(const Json& obj, const char* key) {
  if (!obj.contains(key)) throw ValidationError(std::string("$.") + key, "missing");
  return obj.at(key);
}

const Json& RequireArray(const Json& j, const std::string& path, std::size_t size) {
  if (!j.is_array()) throw ValidationError(path, "expected an array");
  if (j.size() != size) {
    throw ValidationError(path, "expected " + std::to_string(size) + " entries, got " +
                                    std::to_string(j.size()));
  }
  return j;
}

double ReadNumber(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(path, "must be finite");
  return v;
}

std::uint64_t ReadCount(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned()) throw ValidationError(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::string ReadString(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ValidationError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> ReadVector(const Json& j, const std::string& path, std::size_t size) {
  RequireArray(j, path, size);
  std::vector<double> out(size);
  for (std::size_t i = 0; i < size; ++i) out[i] = ReadNumber(j[i], Index(path, i));
  return out;
}

Space ReadSpace(const Json& obj, const char* key, SpaceKind kind) {
  const std::string path = std::string("$.") + key;
  const Json& j = Require(obj, key);
  if (!j.is_array() || j.empty()) throw ValidationError(path, "expected a non-empty array");
  std::vector<std::string> symbols;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string s = ReadString(j[i], Index(path, i));
    if (s.empty()) throw ValidationError(Index(path, i), "empty symbol");
    if (!seen.insert(s).second) throw ValidationError(Index(path, i), "duplicate symbol '" + s + "'");
    symbols.push_back(std::move(s));
  }
  return Space(kind, std::move(symbols));
}

std::size_t ReadSymbol(const Json& obj, const char* key, const Space& space) {
  const std::string path = std::string("$.") + key;
  const std::string s = ReadString(Require(obj, key), path);
  const auto index = space.IndexOf(s);
  if (!index) throw ValidationError(path, "unknown symbol '" + s + "'");
  return *index;
}

// Reads j[a][b][k] into out[(b * n_a + a) * n_k + k], i.e. a table whose rows
// are (b, a) with the first given space slowest. Rows over k must be
// distributions when `stochastic`.
std::vector<double> ReadCube(const Json& j, const std::string& path, std::size_t n_a,
                             std::size_t n_b, std::size_t n_k, bool stochastic) {
  RequireArray(j, path, n_a);
  std::vector<double> out(n_a * n_b * n_k);
  for (std::size_t a = 0; a < n_a; ++a) {
    const std::string pa = Index(path, a);
    RequireArray(j[a], pa, n_b);
    for (std::size_t b = 0; b < n_b; ++b) {
      const std::string pb = Index(pa, b);
      RequireArray(j[a][b], pb, n_k);
      double sum = 0.0;
      for (std::size_t k = 0; k < n_k; ++k) {
        const double v = ReadNumber(j[a][b][k], Index(pb, k));
        if (v < 0.0) throw ValidationError(Index(pb, k), "must be >= 0");
        out[(b * n_a + a) * n_k + k] = v;
        sum += v;
      }
      if (stochastic && std::abs(sum - 1.0) > kRowSumTolerance) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "row sums to " << sum << ", expected 1";
        throw ValidationError(pb, msg.str());
      }
    }
  }
  return out;
}

Json WriteCube(const std::vector<double>& table, std::size_t n_a, std::size_t n_b,
               std::size_t n_k) {
  Json out = Json::array();
  for (std::size_t a = 0; a < n_a; ++a) {
    Json ja = Json::array();
    for (std::size_t b = 0; b < n_b; ++b) {
      Json jb = Json::array();
      for (std::size_t k = 0; k < n_k; ++k) jb.push_back(table[(b * n_a + a) * n_k + k]);
      ja.push_back(std::move(jb));
    }
    out.push_back(std::move(ja));
  }
  return out;
}

std::vector<std::size_t> ReadSizes(const Json& obj, const char* key, const std::string& base,
                                   std::vector<std::size_t> fallback) {
  if (!obj.contains(key)) return fallback;
  const std::string path = base + "." + key;
  const Json& j = obj.at(key);
  if (!j.is_array() || j.empty()) throw ValidationError(path, "expected a non-empty array");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(ReadCount(j[i], Index(path, i)));
  return out;
}

void ParseGameParts(const Json& root, SpecFile& spec) {
  Space utterances = ReadSpace(root, "utterances", SpaceKind::kUtterance);
  Space intentions = ReadSpace(root, "intentions", SpaceKind::kIntention);
  Space contexts = ReadSpace(root, "contexts", SpaceKind::kContext);
  const std::size_t n_u = utterances.size();
  const std::size_t n_z = intentions.size();
  const std::size_t n_c = contexts.size();

  std::vector<double> listener =
      ReadCube(Require(root, "listener"), "$.listener", n_c, n_u, n_z, true);
  const std::size_t target = ReadSymbol(root, "target_intention", intentions);
  const std::size_t context = ReadSymbol(root, "context", contexts);
  spec.game.emplace(utterances, intentions, contexts,
                    Conditional({utterances, contexts}, intentions, std::move(listener)), target,
                    context);

  if (root.contains("base_speaker")) {
    std::vector<double> base =
        ReadCube(root.at("base_speaker"), "$.base_speaker", n_c, n_z, n_u, true);
    spec.base_speaker.emplace(Conditional({intentions, contexts}, utterances, std::move(base)));
  }
  if (root.contains("tom_listener")) {
    std::vector<double> tom =
        ReadCube(root.at("tom_listener"), "$.tom_listener", n_c, n_u, n_z, true);
    spec.tom_listener.emplace(ToMListener::FromListener(
        Conditional({utterances, contexts}, intentions, std::move(tom))));
  }

  const bool has_reward = root.contains("reward");
  const bool has_per_context = root.contains("reward_per_context");
  if (has_reward || has_per_context) {
    RewardTable reward;
    reward.num_contexts = n_c;
    if (root.contains("beta")) {
      reward.beta = ReadNumber(root.at("beta"), "$.beta");
      if (!(reward.beta > 0.0)) throw ValidationError("$.beta", "must be > 0");
    }
    if (has_reward) {
      reward.values = ReadVector(root.at("reward"), "$.reward", n_u);
    }
    if (has_per_context) {
      const Json& j = root.at("reward_per_context");
      RequireArray(j, "$.reward_per_context", n_c);
      std::vector<double> table(n_u * n_c);
      for (std::size_t c = 0; c < n_c; ++c) {
        const auto row = ReadVector(j[c], Index("$.reward_per_context", c), n_u);
        for (std::size_t u = 0; u < n_u; ++u) table[u * n_c + c] = row[u];
      }
      if (!has_reward) {
        reward.values.assign(n_u, 0.0);
        for (std::size_t u = 0; u < n_u; ++u) reward.values[u] = table[u * n_c + context];
      }
      reward.per_context = std::move(table);
    }
    reward.Validate();
    spec.reward = std::move(reward);
  }
}

void ParseLexicon(const Json& root, SpecFile& spec) {
  const Json& j = root.at("lexicon");
  if (!j.is_object() || j.empty()) throw ValidationError("$.lexicon", "expected a non-empty object");
  std::vector<std::pair<std::string, std::vector<std::string>>> entries;
  for (const auto& [utterance, refs] : j.items()) {
    const std::string path = "$.lexicon." + utterance;
    if (utterance.empty()) throw ValidationError(path, "empty utterance");
    if (!refs.is_array()) throw ValidationError(path, "expected an array of referents");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < refs.size(); ++i) names.push_back(ReadString(refs[i], Index(path, i)));
    entries.emplace_back(utterance, std::move(names));
  }
  std::vector<std::string> order;
  if (root.contains("referents")) {
    const Json& r = root.at("referents");
    if (!r.is_array()) throw ValidationError("$.referents", "expected an array");
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::string s = ReadString(r[i], Index("$.referents", i));
      if (s.empty() || !seen.insert(s).second) {
        throw ValidationError(Index("$.referents", i), "empty or duplicate referent");
      }
      order.push_back(std::move(s));
    }
  }
  try {
    spec.lexicon.emplace(Lexicon::FromEntries(entries, order));
  } catch (const ValidationError& e) {
    const std::string& p = e.path();
    throw ValidationError(p.rfind("lexicon", 0) == 0 ? "$." + p : "$.lexicon", e.reason());
  }

  RsaConfig config;
  const std::size_t n_r = spec.lexicon->referents().size();
  if (root.contains("alpha")) config.alpha = ReadNumber(root.at("alpha"), "$.alpha");
  if (root.contains("prior")) {
    config.prior = ReadVector(root.at("prior"), "$.prior", n_r);
  } else {
    config.prior.assign(n_r, 1.0 / static_cast<double>(n_r));
  }
  try {
    config.Validate(*spec.lexicon);
  } catch (const ValidationError& e) {
    throw ValidationError("$." + e.path(), e.reason());
  }
  spec.rsa = std::move(config);
}

void ParseFeedbackTask(const Json& root, SpecFile& spec) {
  const Json& j = root.at("feedback_task");
  const std::string base = "$.feedback_task";
  if (!j.is_object()) throw ValidationError(base, "expected an object");
  FeedbackTaskConfig config;
  config.latent_factors = ReadSizes(j, "latent_factors", base, config.latent_factors);
  config.utterance_factors = ReadSizes(j, "utterance_factors", base, config.utterance_factors);
  if (j.contains("target_seed")) {
    config.target_seed = ReadCount(j.at("target_seed"), base + ".target_seed");
  }
  if (j.contains("identity")) {
    if (!j.at("identity").is_boolean()) throw ValidationError(base + ".identity", "expected a boolean");
    config.identity = j.at("identity").get<bool>();
  }
  try {
    config.Validate();
  } catch (const ValidationError& e) {
    const std::string& p = e.path();
    throw ValidationError(p.rfind("feedback_task", 0) == 0 ? "$." + p : base, e.reason());
  }
  spec.feedback_task = std::move(config);
}

}  // namespace

SpecFile ParseSpec(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::kParse, e.what());
  }
  if (!root.is_object()) throw ValidationError("$", "spec must be a JSON object");

  SpecFile spec;
  if (root.contains("utterances") || root.contains("listener")) {
    ParseGameParts(root, spec);
  } else {
    for (const char* key : {"base_speaker", "tom_listener", "reward", "reward_per_context"}) {
      if (root.contains(key)) {
        throw ValidationError(std::string("$.") + key, "requires a game (utterances, listener, ...)");
      }
    }
  }
  if (root.contains("lexicon")) ParseLexicon(root, spec);
  if (root.contains("feedback_task")) ParseFeedbackTask(root, spec);
  if (!spec.game && !spec.lexicon && !spec.feedback_task) {
    throw ValidationError("$", "spec holds no game, lexicon or feedback_task");
  }
  return spec;
}

SpecFile LoadSpec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseSpec(buffer.str());
}

std::string SerializeSpec(const SpecFile& spec) {
  Json root = Json::object();
  if (spec.game) {
    const CommunicationGame& g = *spec.game;
    const std::size_t n_u = g.utterances().size();
    const std::size_t n_z = g.intentions().size();
    const std::size_t n_c = g.contexts().size();
    root["utterances"] = g.utterances().symbols();
    root["intentions"] = g.intentions().symbols();
    root["contexts"] = g.contexts().symbols();
    root["listener"] = WriteCube(g.listener().table(), n_c, n_u, n_z);
    root["target_intention"] = g.intentions().symbol(g.target_intention());
    root["context"] = g.contexts().symbol(g.context());
    if (spec.base_speaker) {
      root["base_speaker"] = WriteCube(spec.base_speaker->dist().table(), n_c, n_z, n_u);
    }
    if (spec.tom_listener && spec.tom_listener->listener()) {
      root["tom_listener"] = WriteCube(spec.tom_listener->listener()->table(), n_c, n_u, n_z);
    }
    if (spec.reward) {
      root["reward"] = spec.reward->values;
      if (spec.reward->per_context) {
        Json rows = Json::array();
        for (std::size_t c = 0; c < n_c; ++c) {
          Json row = Json::array();
          for (std::size_t u = 0; u < n_u; ++u) row.push_back((*spec.reward->per_context)[u * n_c + c]);
          rows.push_back(std::move(row));
        }
        root["reward_per_context"] = std::move(rows);
      }
      root["beta"] = spec.reward->beta;
    }
  }
  if (spec.lexicon) {
    const Lexicon& lex = *spec.lexicon;
    Json entries = Json::object();
    for (std::size_t u = 0; u < lex.utterances().size(); ++u) {
      Json refs = Json::array();
      for (std::size_t z = 0; z < lex.referents().size(); ++z) {
        if (lex.Truth(u, z)) refs.push_back(lex.referents().symbol(z));
      }
      entries[lex.utterances().symbol(u)] = std::move(refs);
    }
    root["lexicon"] = std::move(entries);
    root["referents"] = lex.referents().symbols();
    if (spec.rsa) {
      root["prior"] = spec.rsa->prior;
      root["alpha"] = spec.rsa->alpha;
    }
  }
  if (spec.feedback_task) {
    const FeedbackTaskConfig& f = *spec.feedback_task;
    root["feedback_task"] = {{"latent_factors", f.latent_factors},
                             {"utterance_factors", f.utterance_factors},
                             {"target_seed", f.target_seed},
                             {"identity", f.identity}};
  }
  return root.dump(2) + "\n";
}

}  // namespace bpslab
