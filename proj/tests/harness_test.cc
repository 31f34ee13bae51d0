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

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bpslab/harness.h"

namespace bpslab {
namespace {

namespace fs = std::filesystem;

const std::string kData = BPSLAB_DATA_DIR;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bpslab");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = CliMain(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("bpslab_harness_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  return dir;
}

int ExitCodeOf(const std::string& command) {
  const int status = std::system((command + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_CASE("usage errors exit with 2") {
  CHECK(Cli({"frobnicate"}).code == 2);
  CHECK(Cli({}).code == 2);
  CHECK(Cli({"solve", "--format", "xml"}).code == 2);
  CHECK(Cli({"solve", "--lr", "-1"}).code == 2);
  CHECK(Cli({"--help"}).code == 0);
  const std::string cli = BPSLAB_CLI_PATH;
  CHECK(ExitCodeOf(cli + " frobnicate") == 2);
  CHECK(ExitCodeOf(cli + " solve --spec " + kData + "/two_utterance.json") == 0);
  CHECK(ExitCodeOf(cli + " solve") == 1);
}

TEST_CASE("runtime and validation errors exit with 1") {
  CHECK(Cli({"solve"}).code == 1);
  CHECK(Cli({"solve", "--spec", "/nonexistent.json"}).code == 1);
  const CliRun r = Cli({"rlhf", "--spec", kData + "/search_limited.json"});
  CHECK(r.code == 1);
  CHECK(r.err.find("$.base_speaker[0][0][0]") != std::string::npos);
  CHECK(Cli({"rsa", "--spec", kData + "/two_utterance.json"}).code == 1);
  CHECK(Cli({"feedback", "--budgets", "10,5"}).code == 1);
}

TEST_CASE("solve and ups print records") {
  const CliRun r = Cli({"solve", "--spec", kData + "/two_utterance.json"});
  CHECK(r.code == 0);
  CHECK(r.out == "utterance,score,selected\nu0,0.90000000000000002,1\nu1,0.10000000000000001,0\n");
  const CliRun j = Cli({"ups", "--spec", kData + "/two_utterance.json", "--format", "json"});
  CHECK(j.code == 0);
  const auto rows = nlohmann::json::parse(j.out);
  CHECK(rows.size() == 2);
  CHECK(rows[0]["probability"].get<double>() == doctest::Approx(0.9));
}

TEST_CASE("rlhf run directory") {
  const fs::path dir = TempDir("rlhf");
  const CliRun r = Cli({"rlhf", "--spec", kData + "/two_utterance.json", "--seed", "7", "--out",
                        dir.string()});
  REQUIRE(r.code == 0);
  for (const char* f : {"config.json", "rlhf.csv", "summary.json"}) CHECK(fs::exists(dir / f));
  for (const auto& entry : fs::directory_iterator(dir)) {
    CHECK(entry.path().extension() != ".tmp");
  }
  const std::string csv = Slurp(dir / "rlhf.csv");
  CHECK(csv.rfind("step,objective,grad_norm,tv_to_closed_form\n", 0) == 0);
  const auto summary = nlohmann::json::parse(Slurp(dir / "summary.json"));
  CHECK(summary["seed"] == 7);
  CHECK(summary["rng"] == "bpslab-rng-v1");
  CHECK(summary["version"] == BPSLAB_VERSION);
  CHECK(summary.contains("wall_clock_seconds"));
  CHECK(summary["converged"] == true);
  CHECK(summary["final_tv_to_closed_form"].get<double>() <= 1e-6);
  const auto config = nlohmann::json::parse(Slurp(dir / "config.json"));
  CHECK(config["subcommand"] == "rlhf");
  CHECK(config["spec"]["reward"][0] == 1.0);
}

TEST_CASE("same seed gives identical csv") {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"mc-infer", "--spec", kData + "/reference_game.json",
                                 "--trials", "200", "--n-candidates", "3"},
        std::vector<std::string>{"compare", "--budgets", "10,100", "--seeds", "1,2"},
        std::vector<std::string>{"fit-reward", "--spec", kData + "/reference_game.json",
                                 "--pairs", "2000"}}) {
    const fs::path a = TempDir("a"), b = TempDir("b");
    std::vector<std::string> run_a = args, run_b = args;
    run_a.insert(run_a.end(), {"--seed", "3", "--out", a.string()});
    run_b.insert(run_b.end(), {"--seed", "3", "--out", b.string()});
    REQUIRE(Cli(run_a).code == 0);
    REQUIRE(Cli(run_b).code == 0);
    const std::string name = args[0] + ".csv";
    CHECK(Slurp(a / name) == Slurp(b / name));
    CHECK(!Slurp(a / name).empty());
  }
}

TEST_CASE("diagnose prints a report and a verdict") {
  const CliRun r = Cli({"diagnose", "--spec", kData + "/search_limited.json", "--n-candidates",
                        "2", "--trials", "500"});
  CHECK(r.code == 0);
  const auto newline = r.out.find('\n');
  REQUIRE(newline != std::string::npos);
  const auto report = nlohmann::json::parse(r.out.substr(0, newline));
  CHECK(report["verdict"] == "search-limited");
  CHECK(report["metric"] == "expected_listener_probability");
  CHECK(r.out.substr(newline + 1) == "verdict: search-limited\n");
}

TEST_CASE("check-eq8 and rsa summaries") {
  ExperimentConfig config;
  config.subcommand = "check-eq8";
  config.spec_path = kData + "/reference_game.json";
  config.thetas = 20;
  const RunResult r = Run(config);
  const auto s = nlohmann::json::parse(r.summary_json);
  CHECK(s["gap_spread"].get<double>() <= 1e-9);
  CHECK(s["max_gap_minus_log_partition"].get<double>() <= 1e-9);
  CHECK(s["max_grad_diff"].get<double>() <= 1e-9);
  CHECK(s["max_finite_difference_error"].get<double>() <= 1e-6);
  CHECK(r.records.rows.size() == 20);

  config.subcommand = "rsa";
  config.spec_path = kData + "/glasses_hat.json";
  const auto rsa = nlohmann::json::parse(Run(config).summary_json);
  CHECK(rsa["max_tv"].get<double>() <= 1e-12);
}

TEST_CASE("csv rendering") {
  Table t{"t", {"a", "b"}, {{std::int64_t{1}, std::string("x,y")}, {0.1, std::string("q\"")}}};
  CHECK(RenderCsv(t) == "a,b\n1,\"x,y\"\n0.10000000000000001,\"q\"\"\"\n");
  CHECK(Subcommands().size() == 11);
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  c.subcommand = "nope";
  CHECK_THROWS(c.Validate());
  c.subcommand = "feedback";
  c.smoothing = 0.0;
  CHECK_THROWS(c.Validate());
  c.smoothing = 1e-3;
  CHECK_NOTHROW(c.Validate());
}

}  // namespace
}  // namespace bpslab
