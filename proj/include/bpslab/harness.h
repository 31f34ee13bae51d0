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

#ifndef BPSLAB_HARNESS_H_
#define BPSLAB_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bpslab/diagnosis.h"

namespace bpslab {

enum class OutputFormat { kCsv, kJson };

// Parameter bag for one run. Unset optionals take per-subcommand defaults.
struct ExperimentConfig {
  std::string subcommand;
  std::optional<std::filesystem::path> spec_path;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> out_dir;
  OutputFormat format = OutputFormat::kCsv;

  std::optional<double> beta;          // overrides the spec's beta
  double learning_rate = 0.5;
  std::size_t max_steps = 50000;
  double tolerance = 1e-8;
  std::size_t n_candidates = 8;
  std::size_t pairs = 10000;
  std::optional<std::size_t> trials;   // mc-infer 1000, diagnose 2000
  std::vector<std::size_t> budgets = {100, 1000, 10000};
  std::vector<std::uint64_t> seeds;    // feedback: {seed}; compare: seed .. seed+9
  double epsilon = 0.02;
  double smoothing = 1e-3;
  double posterior_fraction = 0.5;
  double reward_learning_rate = 0.05;
  std::size_t thetas = 100;
  std::size_t record_every = 100;
  Metric metric = Metric::kListenerProbability;

  // Throws Error(kInvalidArgument) on an unknown subcommand or a knob out of
  // range, and Error(kIo) when the spec file does not exist.
  void Validate() const;
};

const std::vector<std::string>& Subcommands();

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct RunResult {
  std::string config_json;    // knobs plus the loaded spec
  Table records;              // per-trial / per-step records
  std::vector<Table> extra;   // e.g. the comparison summary
  std::string summary_json;   // statistics, seed, version, rng, wall clock
  std::string report;         // text for stdout regardless of --out (diagnose)
  double wall_clock_seconds = 0.0;
};

RunResult Run(const ExperimentConfig& config);

// Doubles are printed with "%.17g".
std::string RenderCsv(const Table& table);
std::string RenderJson(const Table& table);

// Writes `contents` to a temporary sibling and renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view contents);

// config.json, <records>.{csv,json}, extra tables and summary.json.
void WriteRunDirectory(const RunResult& result, const std::filesystem::path& dir,
                       OutputFormat format);

// Exit codes: 0 success, 1 runtime or validation error, 2 usage error.
int CliMain(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace bpslab

#endif  // BPSLAB_HARNESS_H_
