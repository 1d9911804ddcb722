// Copyright (c) 2026 the glik authors
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

#include "likelihood_approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "dataset.hpp"

namespace glik {

ClassPseudoObs softmax_pseudo_obs(int y, int num_classes, const ApproxConfig& cfg) {
  if (num_classes < 2) {
    throw std::invalid_argument("softmax_pseudo_obs: need at least 2 classes");
  }
  if (y < 0 || y >= num_classes) {
    throw std::invalid_argument("softmax_pseudo_obs: class index out of range");
  }
  if (!(cfg.alpha_eps > 0.0)) {
    throw std::invalid_argument("softmax_pseudo_obs: alpha_eps must be positive");
  }
  ClassPseudoObs obs;
  obs.means.resize(num_classes);
  obs.variances.resize(num_classes);
  // Only two distinct Gamma parameters arise (observed vs. not), match once each.
  const GaussianApprox hit =
      match(TransformedDensity::gamma_log(cfg.alpha_eps + 1.0, 1.0), cfg.method);
  const GaussianApprox miss =
      match(TransformedDensity::gamma_log(cfg.alpha_eps, 1.0), cfg.method);
  for (int k = 0; k < num_classes; ++k) {
    const GaussianApprox& g = (k == y) ? hit : miss;
    obs.means[k] = g.mean;
    obs.variances[k] = g.variance;
  }
  return obs;
}

BinaryPseudoObs logistic_pseudo_obs(int y, const ApproxConfig& cfg) {
  if (y != 0 && y != 1) {
    throw std::invalid_argument("logistic_pseudo_obs: label must be 0 or 1");
  }
  if (!(cfg.alpha_eps > 0.0) || !(cfg.beta_eps > 0.0)) {
    throw std::invalid_argument("logistic_pseudo_obs: prior parameters must be positive");
  }
  const GaussianApprox g = match(
      TransformedDensity::beta_logit(cfg.alpha_eps + y, cfg.beta_eps + 1 - y), cfg.method);
  return {g.mean, g.variance};
}

namespace {

double gauss_log_density(double x, double mean, double variance) {
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) -
         0.5 * (x - mean) * (x - mean) / variance;
}

}  // namespace

double approx_log_lik(std::span<const double> logits, const ClassPseudoObs& obs) {
  if (logits.size() != obs.means.size()) {
    throw std::invalid_argument("approx_log_lik: dimension mismatch");
  }
  double acc = 0.0;
  for (size_t k = 0; k < logits.size(); ++k) {
    acc += gauss_log_density(logits[k], obs.means[k], obs.variances[k]);
  }
  return acc;
}

double approx_log_lik(double logit, const BinaryPseudoObs& obs) {
  return gauss_log_density(logit, obs.mean, obs.variance);
}

ApproxConfig select_alpha_eps(const Dataset& train, std::span<const double> grid,
                              MatchMethod method, const PseudoTrainer& trainer) {
  if (grid.empty()) {
    throw std::invalid_argument("select_alpha_eps: empty grid");
  }
  // Ascending scan with strict improvement gives the smaller-alpha tie-break.
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  ApproxConfig best;
  double best_ll = -std::numeric_limits<double>::infinity();
  bool have = false;
  for (double a : sorted) {
    ApproxConfig cfg{method, a, a};
    std::vector<std::vector<double>> probs;
    try {
      probs = trainer(train, cfg);
    } catch (const std::exception& e) {
      throw std::runtime_error("select_alpha_eps: trainer failed at alpha_eps=" +
                               std::to_string(a) + ": " + e.what());
    }
    double ll = 0.0;
    for (int n = 0; n < train.size(); ++n) {
      ll += std::log(std::max(probs[n][train.labels[n]], 1e-12));
    }
    ll /= train.size();
    if (!have || ll > best_ll) {
      have = true;
      best_ll = ll;
      best = cfg;
    }
  }
  return best;
}

}  // namespace glik
