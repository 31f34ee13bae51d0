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

#include "bpslab/harness.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "bpslab/error.h"
#include "bpslab/feedback.h"
#include "bpslab/game.h"
#include "bpslab/inference.h"
#include "bpslab/rng.h"
#include "bpslab/rsa.h"
#include "bpslab/spec_io.h"
#include "bpslab/speakers.h"

namespace bpslab {
namespace {

using Json = nlohmann::ordered_json;

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string FormatCell(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) return FormatDouble(*d);
  return std::get<std::string>(cell);
}

std::string CsvEscape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

Json CellJson(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
  if (const auto* d = std::get_if<double>(&cell)) {
    return std::isfinite(*d) ? Json(*d) : Json(FormatDouble(*d));
  }
  return std::get<std::string>(cell);
}

Cell I(std::size_t v) { return static_cast<std::int64_t>(v); }

// JSON doubles must be finite; infinities are written as strings.
Json Num(double v) { return std::isfinite(v) ? Json(v) : Json(FormatDouble(v)); }

Json NumArray(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(Num(x));
  return out;
}

const char* FormatName(OutputFormat f) { return f == OutputFormat::kCsv ? "csv" : "json"; }

// --------------------------------------------------------------------------
// Spec access

struct Loaded {
  SpecFile spec;
  Json spec_json;
};

Loaded LoadFor(const ExperimentConfig& config, bool required) {
  Loaded out;
  if (!config.spec_path) {
    if (required) {
      throw Error(ErrorKind::kInvalidArgument, config.subcommand + " needs --spec");
    }
    out.spec_json = nullptr;
    return out;
  }
  out.spec = LoadSpec(*config.spec_path);
  out.spec_json = Json::parse(SerializeSpec(out.spec));
  spdlog::debug("loaded spec {}", config.spec_path->string());
  return out;
}

const CommunicationGame& NeedGame(const SpecFile& spec, const std::string& sub) {
  if (!spec.game) throw ValidationError("$.listener", sub + " needs a communication game");
  return *spec.game;
}

const BaseSpeaker& NeedBase(const SpecFile& spec, const std::string& sub) {
  if (!spec.base_speaker) throw ValidationError("$.base_speaker", sub + " needs a base speaker");
  return *spec.base_speaker;
}

RewardTable NeedReward(const SpecFile& spec, const ExperimentConfig& config) {
  if (!spec.reward) {
    throw ValidationError("$.reward", config.subcommand + " needs a reward table");
  }
  RewardTable r = *spec.reward;
  if (config.beta) r.beta = *config.beta;
  r.Validate();
  return r;
}

ToMListener ResolveTom(const SpecFile& spec, const ExperimentConfig& config,
                       std::string* source) {
  const CommunicationGame& game = *spec.game;
  if (spec.tom_listener) {
    *source = "tom_listener";
    return *spec.tom_listener;
  }
  if (spec.reward) {
    *source = "reward";
    return ToMListener::FromReward(NeedReward(spec, config), game.utterances(), game.contexts());
  }
  *source = "listener";
  return ToMListener::FromListener(game.listener());
}

void RequirePositiveReference(const BaseSpeaker& base, std::size_t target, std::size_t context) {
  const auto row = base.Row(target, context);
  for (std::size_t u = 0; u < row.size(); ++u) {
    if (!(row[u] > 0.0)) {
      throw ValidationError("$.base_speaker[" + std::to_string(context) + "][" +
                                std::to_string(target) + "][" + std::to_string(u) + "]",
                            "rlhf needs a strictly positive reference speaker (a zero makes the "
                            "KL term infinite)");
    }
  }
}

// --------------------------------------------------------------------------
// Subcommands. Each fills records and the subcommand-specific summary keys.

struct Output {
  Table records;
  std::vector<Table> extra;
  Json stats = Json::object();
  std::string report;
};

Output RunSolve(const ExperimentConfig&, const SpecFile& spec) {
  const CommunicationGame& game = NeedGame(spec, "solve");
  const std::vector<double> scores = game.TargetColumn();
  const std::size_t best = SolveExact(game, scores);
  Output out;
  out.records = {"solve", {"utterance", "score", "selected"}, {}};
  for (std::size_t u = 0; u < scores.size(); ++u) {
    out.records.rows.push_back({game.utterances().symbol(u), scores[u], I(u == best ? 1 : 0)});
  }
  out.stats["selected"] = game.utterances().symbol(best);
  out.stats["selected_index"] = best;
  out.stats["score"] = scores[best];
  return out;
}

Output RunUps(const ExperimentConfig&, const SpecFile& spec) {
  const CommunicationGame& game = NeedGame(spec, "ups");
  const Distribution p = UpsDistribution(game);
  Output out;
  out.records = {"ups", {"utterance", "probability"}, {}};
  for (std::size_t u = 0; u < p.size(); ++u) {
    out.records.rows.push_back({game.utterances().symbol(u), p[u]});
  }
  const std::size_t best = ArgmaxLowest(p);
  out.stats["argmax"] = game.utterances().symbol(best);
  out.stats["argmax_matches_solve"] = best == SolveExact(game);
  return out;
}

Output RunBps(const ExperimentConfig& config, const SpecFile& spec) {
  const CommunicationGame& game = NeedGame(spec, "bps");
  std::string source;
  BpsSpeaker speaker(NeedBase(spec, "bps"), ResolveTom(spec, config, &source));
  const std::size_t z = game.target_intention();
  const std::size_t c = game.context();
  const Distribution p = BpsDistribution(speaker, z, c);
  const auto base = speaker.base().Row(z, c);
  const std::vector<double> tom = speaker.tom().Column(z, c);
  Output out;
  out.records = {"bps", {"utterance", "base", "tom", "probability"}, {}};
  for (std::size_t u = 0; u < p.size(); ++u) {
    out.records.rows.push_back({game.utterances().symbol(u), base[u], tom[u], p[u]});
  }
  out.stats["tom_source"] = source;
  out.stats["argmax"] = game.utterances().symbol(ArgmaxLowest(p));
  return out;
}

Output RunRsa(const ExperimentConfig&, const SpecFile& spec) {
  if (!spec.lexicon) throw ValidationError("$.lexicon", "rsa needs a lexicon");
  const Lexicon& lex = *spec.lexicon;
  const RsaConfig& rsa = *spec.rsa;
  const Conditional l0 = LiteralListener(lex, rsa.prior);
  const Conditional s1 = PragmaticSpeaker(l0, rsa.alpha);
  const BpsSpeaker bps = RsaAsBps(lex, rsa);
  Output out;
  out.records = {"rsa", {"referent", "utterance", "s1", "bps"}, {}};
  double max_tv = 0.0;
  for (std::size_t z = 0; z < lex.referents().size(); ++z) {
    const auto direct = s1.Row({z});
    const Distribution via_bps = BpsDistribution(bps, z, 0);
    max_tv = std::max(max_tv, TotalVariation(direct, via_bps));
    for (std::size_t u = 0; u < lex.utterances().size(); ++u) {
      out.records.rows.push_back(
          {lex.referents().symbol(z), lex.utterances().symbol(u), direct[u], via_bps[u]});
    }
  }
  out.stats["alpha"] = rsa.alpha;
  out.stats["max_tv"] = max_tv;
  return out;
}

Output RunMcInfer(const ExperimentConfig& config, const SpecFile& spec) {
  const CommunicationGame& game = NeedGame(spec, "mc-infer");
  const BaseSpeaker& base = NeedBase(spec, "mc-infer");
  const RewardTable reward = NeedReward(spec, config);
  const std::size_t z = game.target_intention();
  const std::size_t c = game.context();
  const std::size_t trials = config.trials.value_or(1000);
  const std::size_t exact = ExactPragmaticArgmax(base, reward, z, c);
  Output out;
  out.records = {"mc-infer", {"trial", "seed", "choice", "exact", "agree"}, {}};
  std::size_t agree = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng = DeriveStream(config.seed, i);
    const std::size_t choice = McPragmaticInfer(base, reward, z, c, config.n_candidates, rng);
    agree += choice == exact;
    out.records.rows.push_back({I(i), I(config.seed + i), game.utterances().symbol(choice),
                                game.utterances().symbol(exact), I(choice == exact ? 1 : 0)});
  }
  out.stats["n_candidates"] = config.n_candidates;
  out.stats["trials"] = trials;
  out.stats["exact_argmax"] = game.utterances().symbol(exact);
  out.stats["agreement_rate"] = trials ? static_cast<double>(agree) / static_cast<double>(trials)
                                       : 0.0;
  return out;
}

RlhfProblem MakeProblem(const ExperimentConfig& config, const SpecFile& spec) {
  const CommunicationGame& game = NeedGame(spec, config.subcommand);
  const BaseSpeaker& base = NeedBase(spec, config.subcommand);
  RequirePositiveReference(base, game.target_intention(), game.context());
  return RlhfProblem{base, NeedReward(spec, config), game.target_intention(), game.context()};
}

Output RunRlhf(const ExperimentConfig& config, const SpecFile& spec) {
  const RlhfProblem problem = MakeProblem(config, spec);
  const BaseSpeaker& base = problem.reference;
  SoftmaxPolicy init(base.intentions().size(), base.contexts().size(), base.utterances().size());
  OptimizerOptions options{config.learning_rate, config.max_steps, config.tolerance};
  Output out;
  out.records = {"rlhf", {"step", "objective", "grad_norm", "tv_to_closed_form"}, {}};
  double final_tv = 0.0;
  auto [policy, report] = OptimizeVariational(
      init, problem, options,
      [&](const OptimizeProgress& p) {
        out.records.rows.push_back({I(p.step), p.objective, p.grad_norm, p.tv_to_closed_form});
        final_tv = p.tv_to_closed_form;
        spdlog::debug("step {} objective {} grad {}", p.step, p.objective, p.grad_norm);
      },
      config.record_every);
  out.stats["beta"] = problem.beta();
  out.stats["steps"] = report.steps;
  out.stats["converged"] = report.converged;
  out.stats["final_objective"] = report.final_objective;
  out.stats["final_grad_norm"] = report.final_grad_norm;
  out.stats["final_tv_to_closed_form"] = final_tv;
  out.stats["closed_form"] = NumArray(ClosedFormRlhfOptimum(problem));
  out.stats["learned"] = NumArray(policy.Probabilities(problem.target, problem.context));
  return out;
}

Output RunCheckEq8(const ExperimentConfig& config, const SpecFile& spec) {
  const RlhfProblem problem = MakeProblem(config, spec);
  const BaseSpeaker& base = problem.reference;
  const std::size_t n_z = base.intentions().size();
  const std::size_t n_c = base.contexts().size();
  const std::size_t n_u = base.utterances().size();
  const BpsSpeaker posterior = problem.Posterior();
  const double beta = problem.beta();
  const double log_partition = LogPartition(problem);
  constexpr double kStep = 1e-5;

  Rng rng(config.seed);
  Output out;
  out.records = {"check-eq8",
                 {"theta", "vi", "rlhf", "gap", "log_partition", "grad_diff", "fd_error"},
                 {}};
  double lo = INFINITY, hi = -INFINITY, worst_gap = 0.0, worst_grad = 0.0, worst_fd = 0.0;
  for (std::size_t t = 0; t < config.thetas; ++t) {
    std::vector<double> logits(n_z * n_c * n_u);
    for (double& x : logits) x = 6.0 * rng.Uniform() - 3.0;
    SoftmaxPolicy policy(n_z, n_c, n_u, std::move(logits));
    const double vi = VariationalObjective(policy, posterior, problem.target, problem.context);
    const double rlhf = RlhfObjective(policy, problem);
    const double gap = vi - rlhf / beta;
    const auto g_vi = ObjectiveGradient(policy, problem, Objective::kVariational);
    const auto g_rlhf = ObjectiveGradient(policy, problem, Objective::kRlhf);
    double grad_diff = 0.0;
    for (std::size_t i = 0; i < g_vi.size(); ++i) {
      grad_diff = std::max(grad_diff, std::abs(g_vi[i] - g_rlhf[i] / beta));
    }
    double fd_error = 0.0;
    for (std::size_t i = 0; i < g_rlhf.size(); ++i) {
      SoftmaxPolicy plus = policy, minus = policy;
      plus.mutable_logits()[i] += kStep;
      minus.mutable_logits()[i] -= kStep;
      const double fd = (RlhfObjective(plus, problem) - RlhfObjective(minus, problem)) / (2 * kStep);
      fd_error = std::max(fd_error, std::abs(fd - g_rlhf[i]));
    }
    lo = std::min(lo, gap);
    hi = std::max(hi, gap);
    worst_gap = std::max(worst_gap, std::abs(gap - log_partition));
    worst_grad = std::max(worst_grad, grad_diff);
    worst_fd = std::max(worst_fd, fd_error);
    out.records.rows.push_back({I(t), vi, rlhf, gap, log_partition, grad_diff, fd_error});
  }
  out.stats["beta"] = beta;
  out.stats["thetas"] = config.thetas;
  out.stats["log_partition"] = log_partition;
  out.stats["gap_spread"] = config.thetas ? hi - lo : 0.0;
  out.stats["max_gap_minus_log_partition"] = worst_gap;
  out.stats["max_grad_diff"] = worst_grad;
  out.stats["max_finite_difference_error"] = worst_fd;
  return out;
}

Output RunFitReward(const ExperimentConfig& config, const SpecFile& spec) {
  const CommunicationGame& game = NeedGame(spec, "fit-reward");
  Rng rng(config.seed);
  const std::vector<PreferenceDatum> data = SamplePreferences(game, config.pairs, rng);
  const RewardFit fit = FitRewardFromPreferences(data, game.utterances().size());
  const std::vector<double> fitted = TomFromReward(fit.reward).Column(0, 0);
  const Distribution target = Normalize(game.TargetColumn());
  Output out;
  out.records = {"fit-reward", {"utterance", "fitted_reward", "fitted_tom", "target_tom"}, {}};
  for (std::size_t u = 0; u < fitted.size(); ++u) {
    out.records.rows.push_back(
        {game.utterances().symbol(u), fit.reward.values[u], fitted[u], target[u]});
  }
  Json unobserved = Json::array();
  for (std::size_t u : fit.unobserved) unobserved.push_back(game.utterances().symbol(u));
  out.stats["pairs"] = data.size();
  out.stats["iterations"] = fit.iterations;
  out.stats["final_grad_norm"] = fit.final_grad_norm;
  out.stats["unobserved"] = std::move(unobserved);
  out.stats["tv_fitted_vs_target_tom"] = TotalVariation(fitted, target);
  return out;
}

Output RunDiagnose(const ExperimentConfig& config, const SpecFile& spec) {
  const CommunicationGame& game = NeedGame(spec, "diagnose");
  std::string source;
  const BpsSpeaker model(NeedBase(spec, "diagnose"), ResolveTom(spec, config, &source));
  DiagnosisOptions options;
  options.n = config.n_candidates;
  options.trials = config.trials.value_or(2000);
  options.seed = config.seed;
  options.epsilon = config.epsilon;
  options.metric = config.metric;
  const DiagnosisReport r = Diagnose(model, game, options);

  Output out;
  out.records = {"diagnose",
                 {"model_score", "oracle_pragmatic_score", "oracle_search_score",
                  "oracle_inference_score", "pragmatic_gap", "search_gap", "inference_gap",
                  "verdict"},
                 {}};
  out.records.rows.push_back({r.model_score, r.oracle_pragmatic_score, r.oracle_search_score,
                              r.oracle_inference_score, r.pragmatic_gap(), r.search_gap(),
                              r.inference_gap(), std::string(VerdictName(r.verdict))});
  Json report = Json::object();
  report["model_score"] = r.model_score;
  report["oracle_pragmatic_score"] = r.oracle_pragmatic_score;
  report["oracle_search_score"] = r.oracle_search_score;
  report["oracle_inference_score"] = r.oracle_inference_score;
  report["pragmatic_gap"] = r.pragmatic_gap();
  report["search_gap"] = r.search_gap();
  report["inference_gap"] = r.inference_gap();
  report["verdict"] = VerdictName(r.verdict);
  report["trials"] = r.trials;
  report["n"] = r.n;
  report["seed"] = r.seed;
  report["epsilon"] = r.epsilon;
  report["metric"] = MetricName(r.metric);
  report["tom_source"] = source;
  report["oracles"] =
      "pragmatic: model candidates ranked by the real listener; search: top-n of the real "
      "listener's posterior ranked by the model; inference: exact argmax of base x ToM";
  out.report = report.dump() + "\nverdict: " + VerdictName(r.verdict) + "\n";
  out.stats["report"] = std::move(report);
  return out;
}

FeedbackTask TaskFor(const SpecFile& spec) {
  return MakeFeedbackTask(spec.feedback_task.value_or(FeedbackTaskConfig{}));
}

std::vector<std::uint64_t> SeedsFor(const ExperimentConfig& config, std::size_t count) {
  if (!config.seeds.empty()) return config.seeds;
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < count; ++i) seeds.push_back(config.seed + i);
  return seeds;
}

void AppendCurve(Table& table, const LearningCurve& curve) {
  for (const CurvePoint& p : curve.points) {
    table.rows.push_back({curve.learner, I(curve.seed), I(p.budget), p.kl});
  }
}

Output RunFeedback(const ExperimentConfig& config, const SpecFile& spec) {
  const FeedbackTask task = TaskFor(spec);
  StructuredOptions options{config.smoothing, config.posterior_fraction, true};
  Output out;
  out.records = {"feedback", {"learner", "seed", "budget", "kl"}, {}};
  std::map<std::size_t, std::vector<double>> by_budget;
  for (std::uint64_t seed : SeedsFor(config, 1)) {
    const LearningCurve curve = StructuredFeedbackLearner(task, config.budgets, seed, options);
    AppendCurve(out.records, curve);
    for (const CurvePoint& p : curve.points) by_budget[p.budget].push_back(p.kl);
  }
  Json medians = Json::object();
  for (auto& [budget, kls] : by_budget) medians[std::to_string(budget)] = Median(kls);
  out.stats["median_kl"] = std::move(medians);
  return out;
}

Output RunCompare(const ExperimentConfig& config, const SpecFile& spec) {
  const FeedbackTask task = TaskFor(spec);
  const std::vector<std::uint64_t> seeds = SeedsFor(config, 10);
  const Comparison cmp = CompareSampleEfficiency(
      task, config.budgets, seeds, {config.smoothing, config.posterior_fraction, true},
      {config.reward_learning_rate, 1});
  Output out;
  out.records = {"compare", {"learner", "seed", "budget", "kl"}, {}};
  for (const LearningCurve& curve : cmp.curves) AppendCurve(out.records, curve);
  Table summary{"compare_summary", {"learner", "budget", "median_kl"}, {}};
  for (const SummaryRow& row : cmp.summary) {
    summary.rows.push_back({row.learner, I(row.budget), row.median_kl});
  }
  out.extra.push_back(std::move(summary));

  // Seeds on which the structured learner ends with lower KL, per budget.
  Json wins = Json::object();
  for (std::size_t b = 0; b < config.budgets.size(); ++b) {
    std::size_t count = 0;
    for (std::size_t s = 0; s + 1 < cmp.curves.size(); s += 2) {
      count += cmp.curves[s].points[b].kl < cmp.curves[s + 1].points[b].kl;
    }
    wins[std::to_string(config.budgets[b])] = count;
  }
  out.stats["seeds"] = seeds.size();
  out.stats["structured_wins"] = std::move(wins);
  return out;
}

using Runner = Output (*)(const ExperimentConfig&, const SpecFile&);

struct SubcommandInfo {
  const char* name;
  const char* help;
  Runner run;
  bool needs_spec;
};

const std::vector<SubcommandInfo>& Registry() {
  static const std::vector<SubcommandInfo> registry = {
      {"solve", "Optimal utterance under the real listener", RunSolve, true},
      {"ups", "Unbounded pragmatic speaker distribution", RunUps, true},
      {"bps", "Bounded pragmatic speaker distribution", RunBps, true},
      {"rsa", "Literal listener, pragmatic speaker and its BPS form", RunRsa, true},
      {"mc-infer", "Best-of-n pragmatic inference against the exact argmax", RunMcInfer, true},
      {"rlhf", "Optimize the KL-regularized objective and track the closed form", RunRlhf, true},
      {"check-eq8", "Constant gap between the variational and RLHF objectives", RunCheckEq8, true},
      {"fit-reward", "Fit a Bradley-Terry reward to synthetic preferences", RunFitReward, true},
      {"diagnose", "Classify the failure cause of a speaker", RunDiagnose, true},
      {"feedback", "Learning curve of the structured-feedback learner", RunFeedback, false},
      {"compare", "Structured feedback versus reward-only learning", RunCompare, false},
  };
  return registry;
}

const SubcommandInfo& Lookup(const std::string& name) {
  for (const SubcommandInfo& info : Registry()) {
    if (name == info.name) return info;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown subcommand '" + name + "'");
}

Json ConfigJson(const ExperimentConfig& c, const Json& spec) {
  Json j = Json::object();
  j["subcommand"] = c.subcommand;
  j["spec_path"] = c.spec_path ? Json(c.spec_path->string()) : Json(nullptr);
  j["seed"] = c.seed;
  j["format"] = FormatName(c.format);
  j["beta"] = c.beta ? Json(*c.beta) : Json(nullptr);
  j["lr"] = c.learning_rate;
  j["max_steps"] = c.max_steps;
  j["tol"] = c.tolerance;
  j["n_candidates"] = c.n_candidates;
  j["pairs"] = c.pairs;
  j["trials"] = c.trials ? Json(*c.trials) : Json(nullptr);
  j["budgets"] = c.budgets;
  j["seeds"] = c.seeds;
  j["epsilon"] = c.epsilon;
  j["smoothing"] = c.smoothing;
  j["posterior_fraction"] = c.posterior_fraction;
  j["reward_lr"] = c.reward_learning_rate;
  j["thetas"] = c.thetas;
  j["record_every"] = c.record_every;
  j["metric"] = MetricName(c.metric);
  j["spec"] = spec;
  return j;
}

void InitLogging() {
  static const bool done = [] {
    auto logger = spdlog::stderr_logger_mt("bpslab");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    return true;
  }();
  (void)done;
  const char* env = std::getenv("BPSLAB_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    spdlog::set_level(spdlog::level::err);
  }
}

}  // namespace

const std::vector<std::string>& Subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const SubcommandInfo& info : Registry()) out.push_back(info.name);
    return out;
  }();
  return names;
}

void ExperimentConfig::Validate() const {
  Lookup(subcommand);
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); };
  if (spec_path && !std::filesystem::exists(*spec_path)) {
    throw Error(ErrorKind::kIo, "spec file '" + spec_path->string() + "' does not exist");
  }
  if (beta && !(*beta > 0.0 && std::isfinite(*beta))) fail("--beta must be positive");
  if (!(learning_rate > 0.0 && std::isfinite(learning_rate))) fail("--lr must be positive");
  if (!(tolerance > 0.0)) fail("--tol must be positive");
  if (n_candidates == 0) fail("--n-candidates must be >= 1");
  if (budgets.empty()) fail("--budgets must list at least one budget");
  for (std::size_t i = 1; i < budgets.size(); ++i) {
    if (budgets[i] <= budgets[i - 1]) fail("--budgets must be strictly increasing");
  }
  if (!(epsilon >= 0.0)) fail("--epsilon must be >= 0");
  if (!(smoothing > 0.0)) fail("--smoothing must be > 0");
  if (!(posterior_fraction >= 0.0 && posterior_fraction <= 1.0)) {
    fail("--posterior-fraction must be in [0, 1]");
  }
  if (!(reward_learning_rate > 0.0)) fail("--reward-lr must be positive");
  if (record_every == 0) fail("--record-every must be >= 1");
}

RunResult Run(const ExperimentConfig& config) {
  config.Validate();
  const SubcommandInfo& info = Lookup(config.subcommand);
  const auto start = std::chrono::steady_clock::now();
  spdlog::info("{} seed={}", config.subcommand, config.seed);

  const Loaded loaded = LoadFor(config, info.needs_spec);
  Output out = info.run(config, loaded.spec);

  RunResult result;
  result.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.config_json = ConfigJson(config, loaded.spec_json).dump(2) + "\n";
  result.records = std::move(out.records);
  result.extra = std::move(out.extra);
  result.report = std::move(out.report);

  Json summary = Json::object();
  summary["subcommand"] = config.subcommand;
  summary["version"] = BPSLAB_VERSION;
  summary["rng"] = Rng::kAlgorithm;
  summary["seed"] = config.seed;
  summary["records"] = result.records.rows.size();
  for (auto& [key, value] : out.stats.items()) summary[key] = value;
  summary["wall_clock_seconds"] = result.wall_clock_seconds;
  result.summary_json = summary.dump(2) + "\n";
  spdlog::info("{} done in {:.3f}s", config.subcommand, result.wall_clock_seconds);
  return result;
}

std::string RenderCsv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += CsvEscape(table.columns[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += CsvEscape(FormatCell(row[i]));
    }
    out += '\n';
  }
  return out;
}

std::string RenderJson(const Table& table) {
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json obj = Json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = CellJson(row[i]);
    rows.push_back(std::move(obj));
  }
  return rows.dump(2) + "\n";
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::kIo, "cannot write '" + tmp.string() + "'");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    f.flush();
    if (!f) throw Error(ErrorKind::kIo, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::kIo, "cannot rename onto '" + path.string() + "'");
  }
}

void WriteRunDirectory(const RunResult& result, const std::filesystem::path& dir,
                       OutputFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::kIo, "cannot create output directory '" + dir.string() + "'");
  }
  auto table_file = [&](const Table& t) {
    const bool csv = format == OutputFormat::kCsv;
    WriteFileAtomic(dir / (t.name + (csv ? ".csv" : ".json")), csv ? RenderCsv(t) : RenderJson(t));
  };
  WriteFileAtomic(dir / "config.json", result.config_json);
  table_file(result.records);
  for (const Table& t : result.extra) table_file(t);
  WriteFileAtomic(dir / "summary.json", result.summary_json);
}

int CliMain(int argc, char** argv, std::ostream& out, std::ostream& err) {
  InitLogging();
  CLI::App app{"Bounded pragmatic speaker toolkit", "bpslab"};
  app.set_version_flag("--version", BPSLAB_VERSION);
  app.require_subcommand(1, 1);
  app.fallthrough();

  ExperimentConfig config;
  std::string spec_path, out_dir, format = "csv", metric = "listener";
  std::optional<double> beta;
  std::optional<std::size_t> trials;
  app.add_option("--spec", spec_path, "Spec file (JSON)");
  app.add_option("--seed", config.seed, "Base seed; trial i uses seed + i");
  app.add_option("--out", out_dir, "Write config, records and summary into this directory");
  app.add_option("--format", format, "Record format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--beta", beta, "Reward inverse temperature override")
      ->check(CLI::PositiveNumber);
  app.add_option("--lr", config.learning_rate, "Learning rate (rlhf)")->check(CLI::PositiveNumber);
  app.add_option("--max-steps", config.max_steps, "Maximum optimizer steps");
  app.add_option("--tol", config.tolerance, "Gradient max-norm tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--n-candidates", config.n_candidates, "Candidates per best-of-n draw")
      ->check(CLI::PositiveNumber);
  app.add_option("--pairs", config.pairs, "Synthetic preference pairs");
  app.add_option("--trials", trials, "Monte-Carlo trials");
  app.add_option("--budgets", config.budgets, "Feedback budgets, strictly increasing")
      ->delimiter(',');
  app.add_option("--seeds", config.seeds, "Learner seeds")->delimiter(',');
  app.add_option("--epsilon", config.epsilon, "Diagnosis gap threshold")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--smoothing", config.smoothing, "Additive smoothing of the structured learner")
      ->check(CLI::PositiveNumber);
  app.add_option("--posterior-fraction", config.posterior_fraction,
                 "Share of posterior-sample feedback units")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--reward-lr", config.reward_learning_rate, "Reward-only learner step size")
      ->check(CLI::PositiveNumber);
  app.add_option("--thetas", config.thetas, "Random logit tables for check-eq8");
  app.add_option("--record-every", config.record_every, "Record every k optimizer steps")
      ->check(CLI::PositiveNumber);
  app.add_option("--metric", metric, "Diagnosis score")
      ->check(CLI::IsMember({"listener", "argmax"}));
  for (const SubcommandInfo& info : Registry()) app.add_subcommand(info.name, info.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  config.subcommand = app.get_subcommands().front()->get_name();
  if (!spec_path.empty()) config.spec_path = spec_path;
  if (!out_dir.empty()) config.out_dir = out_dir;
  config.format = format == "json" ? OutputFormat::kJson : OutputFormat::kCsv;
  config.beta = beta;
  config.trials = trials;
  config.metric = metric == "argmax" ? Metric::kArgmaxSuccess : Metric::kListenerProbability;

  try {
    const RunResult result = Run(config);
    if (config.out_dir) {
      WriteRunDirectory(result, *config.out_dir, config.format);
      spdlog::info("wrote {}", config.out_dir->string());
    } else if (result.report.empty()) {
      const bool csv = config.format == OutputFormat::kCsv;
      out << (csv ? RenderCsv(result.records) : RenderJson(result.records));
      for (const Table& t : result.extra) {
        out << '\n' << (csv ? RenderCsv(t) : RenderJson(t));
      }
    }
    out << result.report;
    out.flush();
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bpslab
