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

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "bpslab/error.h"
#include "bpslab/inference.h"

namespace bpslab {
namespace {

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(-x)) = -log sigmoid(x)
double NegLogSigmoid(double x) {
  return x >= 0.0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

struct WinCounts {
  std::size_t n;
  std::vector<double> wins;  // wins[i * n + j]: times i beat j

  double at(std::size_t i, std::size_t j) const { return wins[i * n + j]; }
};

double Loss(const WinCounts& c, const std::vector<double>& r, double reg) {
  double loss = 0.0;
  for (std::size_t i = 0; i < c.n; ++i) {
    for (std::size_t j = 0; j < c.n; ++j) {
      if (c.at(i, j) > 0.0) loss += c.at(i, j) * NegLogSigmoid(r[i] - r[j]);
    }
  }
  double mean = 0.0;
  for (double v : r) mean += v;
  mean /= static_cast<double>(c.n);
  for (double v : r) loss += reg * (v - mean) * (v - mean);
  return loss;
}

}  // namespace

RewardFit FitRewardFromPreferences(std::span<const PreferenceDatum> data,
                                   std::size_t num_utterances, double reg) {
  if (num_utterances == 0) throw Error(ErrorKind::kInvalidArgument, "need at least one utterance");
  if (!(reg > 0.0)) throw Error(ErrorKind::kInvalidArgument, "regularization must be positive");
  const std::size_t n = num_utterances;
  WinCounts counts{n, std::vector<double>(n * n, 0.0)};
  std::vector<bool> seen(n, false);
  for (const PreferenceDatum& d : data) {
    if (d.first >= n || d.second >= n || d.first == d.second) {
      throw Error(ErrorKind::kInvalidArgument, "preference pair must name two distinct utterances");
    }
    counts.wins[d.winner() * n + d.loser()] += 1.0;
    seen[d.first] = seen[d.second] = true;
  }

  RewardFit fit;
  for (std::size_t u = 0; u < n; ++u) {
    if (!seen[u]) fit.unobserved.push_back(u);
  }

  // Free parameters are R_0 .. R_{n-2}; R_{n-1} stays 0.
  const Eigen::Index m = static_cast<Eigen::Index>(n) - 1;
  std::vector<double> r(n, 0.0);
  if (m == 0) {
    fit.reward.values = r;
    return fit;
  }
  double loss = Loss(counts, r, reg);
  for (fit.iterations = 0; fit.iterations < 200; ++fit.iterations) {
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(n);

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double w = counts.at(i, j);
        if (w == 0.0) continue;
        const double s = Sigmoid(r[i] - r[j]);
        const double g = -w * (1.0 - s);
        const double h = w * s * (1.0 - s);
        const auto ii = static_cast<Eigen::Index>(i);
        const auto jj = static_cast<Eigen::Index>(j);
        if (ii < m) grad(ii) += g;
        if (jj < m) grad(jj) -= g;
        if (ii < m) hess(ii, ii) += h;
        if (jj < m) hess(jj, jj) += h;
        if (ii < m && jj < m) {
          hess(ii, jj) -= h;
          hess(jj, ii) -= h;
        }
      }
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      grad(k) += 2.0 * reg * (r[static_cast<std::size_t>(k)] - mean);
      for (Eigen::Index l = 0; l < m; ++l) {
        hess(k, l) += 2.0 * reg * ((k == l ? 1.0 : 0.0) - 1.0 / static_cast<double>(n));
      }
    }
    fit.final_grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (fit.final_grad_norm <= 1e-10 * (1.0 + static_cast<double>(data.size()))) break;

    const Eigen::VectorXd step = hess.ldlt().solve(-grad);
    double t = 1.0;
    std::vector<double> trial(n, 0.0);
    while (true) {
      for (Eigen::Index k = 0; k < m; ++k) {
        trial[static_cast<std::size_t>(k)] = r[static_cast<std::size_t>(k)] + t * step(k);
      }
      const double trial_loss = Loss(counts, trial, reg);
      if (trial_loss <= loss + 1e-4 * t * grad.dot(step) || t < 1e-12) {
        r = trial;
        loss = trial_loss;
        break;
      }
      t *= 0.5;
    }
  }
  fit.reward.values = r;
  fit.reward.beta = 1.0;
  return fit;
}

}  // namespace bpslab
