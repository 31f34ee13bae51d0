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

#include "bpslab/feedback.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bpslab/error.h"
#include "bpslab/rng.h"

namespace bpslab {
namespace {

std::size_t Product(std::span<const std::size_t> sizes) {
  std::size_t p = 1;
  for (std::size_t s : sizes) p *= s;
  return p;
}

// Mixed-radix digits of `index`, first factor slowest.
std::vector<std::size_t> Digits(std::size_t index, std::span<const std::size_t> sizes) {
  std::vector<std::size_t> digits(sizes.size());
  for (std::size_t k = sizes.size(); k-- > 0;) {
    digits[k] = index % sizes[k];
    index /= sizes[k];
  }
  return digits;
}

Distribution Dirichlet1(std::size_t n, Rng& rng) {
  std::vector<double> w(n);
  for (double& x : w) x = -std::log1p(-rng.Uniform()) + 1e-300;
  return Normalize(w);
}

void CheckCheckpoints(std::span<const std::size_t> checkpoints) {
  for (std::size_t i = 1; i < checkpoints.size(); ++i) {
    if (checkpoints[i] <= checkpoints[i - 1]) {
      throw Error(ErrorKind::kInvalidArgument, "budgets must be strictly increasing");
    }
  }
}

// Laplace-smoothed factored estimate of p(u | z) and p(z).
class FactoredEstimate {
 public:
  FactoredEstimate(std::vector<std::size_t> latent_sizes, std::vector<std::size_t> utterance_sizes,
                   double smoothing)
      : latent_sizes_(std::move(latent_sizes)),
        utterance_sizes_(std::move(utterance_sizes)),
        smoothing_(smoothing),
        num_latents_(Product(latent_sizes_)),
        num_utterances_(Product(utterance_sizes_)),
        latent_counts_(num_latents_, 0.0) {
    for (std::size_t k = 0; k < latent_sizes_.size(); ++k) {
      factor_counts_.emplace_back(latent_sizes_[k] * utterance_sizes_[k], 0.0);
      factor_totals_.emplace_back(latent_sizes_[k], 0.0);
    }
  }

  void ObserveLatent(std::size_t z) {
    latent_counts_[z] += 1.0;
    latent_total_ += 1.0;
  }

  void ObservePair(std::size_t z, std::size_t u) {
    const auto zd = Digits(z, latent_sizes_);
    const auto ud = Digits(u, utterance_sizes_);
    for (std::size_t k = 0; k < zd.size(); ++k) {
      factor_counts_[k][zd[k] * utterance_sizes_[k] + ud[k]] += 1.0;
      factor_totals_[k][zd[k]] += 1.0;
    }
  }

  Distribution Reconstruct() const {
    const std::size_t factors = latent_sizes_.size();
    // Per-factor conditional tables.
    std::vector<std::vector<double>> f(factors);
    for (std::size_t k = 0; k < factors; ++k) {
      const std::size_t nu = utterance_sizes_[k];
      f[k].resize(latent_sizes_[k] * nu);
      for (std::size_t a = 0; a < latent_sizes_[k]; ++a) {
        const double denom = factor_totals_[k][a] + smoothing_ * static_cast<double>(nu);
        for (std::size_t x = 0; x < nu; ++x) {
          f[k][a * nu + x] = (factor_counts_[k][a * nu + x] + smoothing_) / denom;
        }
      }
    }
    std::vector<std::vector<std::size_t>> u_digits(num_utterances_);
    for (std::size_t u = 0; u < num_utterances_; ++u) u_digits[u] = Digits(u, utterance_sizes_);

    Distribution p(num_utterances_, 0.0);
    const double z_denom = latent_total_ + smoothing_ * static_cast<double>(num_latents_);
    for (std::size_t z = 0; z < num_latents_; ++z) {
      const double pz = (latent_counts_[z] + smoothing_) / z_denom;
      const auto zd = Digits(z, latent_sizes_);
      for (std::size_t u = 0; u < num_utterances_; ++u) {
        double pu = pz;
        for (std::size_t k = 0; k < factors; ++k) {
          pu *= f[k][zd[k] * utterance_sizes_[k] + u_digits[u][k]];
        }
        p[u] += pu;
      }
    }
    return p;
  }

 private:
  std::vector<std::size_t> latent_sizes_;
  std::vector<std::size_t> utterance_sizes_;
  double smoothing_;
  std::size_t num_latents_;
  std::size_t num_utterances_;
  std::vector<double> latent_counts_;
  double latent_total_ = 0.0;
  std::vector<std::vector<double>> factor_counts_;
  std::vector<std::vector<double>> factor_totals_;
};

}  // namespace

void StructuredTarget::Validate() const {
  if (p_u_given_z.given().size() != 1) {
    throw ValidationError("p_u_given_z", "must be conditioned on the latent space only");
  }
  if (p_z.size() != latents().size()) throw ValidationError("p_z", "needs one entry per latent");
  double sum = 0.0;
  for (double p : p_z) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("p_z", "entries must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance) throw ValidationError("p_z", "must sum to 1");
}

Distribution ImpliedMarginal(const StructuredTarget& target) {
  Distribution p(target.utterances().size(), 0.0);
  for (std::size_t z = 0; z < target.p_z.size(); ++z) {
    const auto row = target.p_u_given_z.Row(z);
    for (std::size_t u = 0; u < p.size(); ++u) p[u] += row[u] * target.p_z[z];
  }
  return p;
}

Distribution BayesPosterior(const StructuredTarget& target, std::size_t utterance) {
  if (utterance >= target.utterances().size()) {
    throw Error(ErrorKind::kInvalidArgument, "utterance out of range");
  }
  std::vector<double> joint(target.p_z.size());
  for (std::size_t z = 0; z < joint.size(); ++z) {
    joint[z] = target.p_u_given_z.At(z, utterance) * target.p_z[z];
  }
  try {
    return Normalize(joint);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kAllZeroWeights) throw;
    throw Error(ErrorKind::kZeroMarginal, "utterance '" + target.utterances().symbol(utterance) +
                                              "' is impossible under the target");
  }
}

void FeedbackTaskConfig::Validate() const {
  if (latent_factors.empty() || utterance_factors.empty()) {
    throw ValidationError("feedback_task", "factor lists must be non-empty");
  }
  for (std::size_t s : latent_factors) {
    if (s == 0) throw ValidationError("feedback_task.latent_factors", "sizes must be >= 1");
  }
  for (std::size_t s : utterance_factors) {
    if (s == 0) throw ValidationError("feedback_task.utterance_factors", "sizes must be >= 1");
  }
  if (identity && latent_factors != utterance_factors) {
    throw ValidationError("feedback_task.identity", "needs identical latent and utterance factors");
  }
  if (latent_factors.size() > 1 && latent_factors.size() != utterance_factors.size()) {
    throw ValidationError("feedback_task",
                          "factored tasks need as many latent as utterance factors");
  }
  if (Product(latent_factors) > 4096 || Product(utterance_factors) > 4096) {
    throw ValidationError("feedback_task", "spaces larger than 4096 are not supported");
  }
}

FeedbackTask MakeFeedbackTask(const FeedbackTaskConfig& config) {
  config.Validate();
  Rng rng(config.target_seed);
  const std::size_t n_z = Product(config.latent_factors);
  const std::size_t n_u = Product(config.utterance_factors);
  Space latents = Space::Indexed(SpaceKind::kIntention, n_z, "z");
  Space utterances = Space::Indexed(SpaceKind::kUtterance, n_u, "u");
  Distribution p_z = Dirichlet1(n_z, rng);

  std::vector<double> table(n_z * n_u, 0.0);
  if (config.identity) {
    for (std::size_t z = 0; z < n_z; ++z) table[z * n_u + z] = 1.0;
  } else if (config.latent_factors.size() == 1) {
    for (std::size_t z = 0; z < n_z; ++z) {
      const Distribution row = Dirichlet1(n_u, rng);
      std::copy(row.begin(), row.end(), table.begin() + static_cast<std::ptrdiff_t>(z * n_u));
    }
  } else {
    const std::size_t factors = config.latent_factors.size();
    std::vector<std::vector<double>> f(factors);
    for (std::size_t k = 0; k < factors; ++k) {
      for (std::size_t a = 0; a < config.latent_factors[k]; ++a) {
        const Distribution row = Dirichlet1(config.utterance_factors[k], rng);
        f[k].insert(f[k].end(), row.begin(), row.end());
      }
    }
    for (std::size_t z = 0; z < n_z; ++z) {
      const auto zd = Digits(z, config.latent_factors);
      for (std::size_t u = 0; u < n_u; ++u) {
        const auto ud = Digits(u, config.utterance_factors);
        double p = 1.0;
        for (std::size_t k = 0; k < factors; ++k) {
          p *= f[k][zd[k] * config.utterance_factors[k] + ud[k]];
        }
        table[z * n_u + u] = p;
      }
    }
    // Renormalize away the rounding in the products.
    for (std::size_t z = 0; z < n_z; ++z) {
      const std::span<const double> row(table.data() + z * n_u, n_u);
      const Distribution fixed = Normalize(row);
      std::copy(fixed.begin(), fixed.end(), table.begin() + static_cast<std::ptrdiff_t>(z * n_u));
    }
  }
  FeedbackTask task{config, StructuredTarget{std::move(p_z),
                                             Conditional({latents}, utterances, std::move(table))}};
  task.target.Validate();
  return task;
}

LearningCurve RewardOnlyLearner(const FeedbackTask& task, std::span<const std::size_t> checkpoints,
                                std::uint64_t seed, const RewardOnlyOptions& options) {
  CheckCheckpoints(checkpoints);
  const Distribution target = ImpliedMarginal(task.target);
  const std::vector<double> log_target = Log(target);
  const std::size_t n_u = target.size();
  Rng rng(seed);
  std::vector<double> theta(n_u, 0.0);

  LearningCurve curve{kRewardOnlyLearner, seed, {}};
  std::size_t spent = 0;
  for (std::size_t checkpoint : checkpoints) {
    for (; spent < checkpoint; ++spent) {
      const std::size_t u = rng.Categorical(Softmax(theta));
      const double score = log_target[u];
      for (std::size_t s = 0; s < options.steps_per_feedback; ++s) {
        const Distribution q = Softmax(theta);
        const double weight = std::log(q[u]) - score;
        for (std::size_t v = 0; v < n_u; ++v) {
          theta[v] -= options.learning_rate * weight * ((v == u ? 1.0 : 0.0) - q[v]);
        }
      }
    }
    curve.points.push_back({checkpoint, KlDivergence(Softmax(theta), target)});
  }
  return curve;
}

LearningCurve StructuredFeedbackLearner(const FeedbackTask& task,
                                        std::span<const std::size_t> checkpoints,
                                        std::uint64_t seed, const StructuredOptions& options) {
  CheckCheckpoints(checkpoints);
  if (!(options.smoothing > 0.0)) throw Error(ErrorKind::kInvalidArgument, "smoothing must be > 0");
  if (!(options.posterior_fraction >= 0.0 && options.posterior_fraction <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "posterior_fraction must be in [0, 1]");
  }
  const StructuredTarget& target = task.target;
  const Distribution truth = ImpliedMarginal(target);
  const std::size_t n_z = target.latents().size();
  const std::size_t n_u = target.utterances().size();

  const bool factored = options.exploit_structure && !task.config.identity &&
                        task.config.latent_factors.size() > 1;
  FactoredEstimate estimate(factored ? task.config.latent_factors : std::vector<std::size_t>{n_z},
                            factored ? task.config.utterance_factors : std::vector<std::size_t>{n_u},
                            options.smoothing);

  std::vector<Distribution> posterior(n_u);
  for (std::size_t u = 0; u < n_u; ++u) {
    if (truth[u] > 0.0) posterior[u] = BayesPosterior(target, u);
  }

  Rng rng(seed);
  LearningCurve curve{kStructuredLearner, seed, {}};
  std::size_t spent = 0;
  const double fraction = options.posterior_fraction;
  for (std::size_t checkpoint : checkpoints) {
    for (; spent < checkpoint; ++spent) {
      const auto t = static_cast<double>(spent);
      const bool posterior_unit = std::floor((t + 1.0) * fraction) > std::floor(t * fraction);
      if (!posterior_unit) {
        const std::size_t z = rng.Categorical(target.p_z);
        const std::size_t u = rng.Categorical(target.p_u_given_z.Row(z));
        estimate.ObserveLatent(z);
        estimate.ObservePair(z, u);
      } else {
        const std::size_t u = rng.Categorical(estimate.Reconstruct());
        if (posterior[u].empty()) continue;  // impossible utterance: no feedback
        const std::size_t z = rng.Categorical(posterior[u]);
        estimate.ObservePair(z, u);
      }
    }
    curve.points.push_back({checkpoint, KlDivergence(estimate.Reconstruct(), truth)});
  }
  return curve;
}

double Median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::kInvalidArgument, "median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

Comparison CompareSampleEfficiency(const FeedbackTask& task, std::span<const std::size_t> budgets,
                                   std::span<const std::uint64_t> seeds,
                                   const StructuredOptions& structured,
                                   const RewardOnlyOptions& reward_only) {
  if (budgets.empty() || seeds.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "need at least one budget and one seed");
  }
  Comparison out;
  for (std::uint64_t seed : seeds) {
    out.curves.push_back(StructuredFeedbackLearner(task, budgets, seed, structured));
    out.curves.push_back(RewardOnlyLearner(task, budgets, seed, reward_only));
  }
  for (const char* learner : {kStructuredLearner, kRewardOnlyLearner}) {
    for (std::size_t b = 0; b < budgets.size(); ++b) {
      std::vector<double> kls;
      for (const LearningCurve& c : out.curves) {
        if (c.learner == learner) kls.push_back(c.points[b].kl);
      }
      out.summary.push_back({learner, budgets[b], Median(std::move(kls))});
    }
  }
  return out;
}

}  // namespace bpslab
