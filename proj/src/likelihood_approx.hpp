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

#ifndef GLIK_LIKELIHOOD_APPROX_HPP
#define GLIK_LIKELIHOOD_APPROX_HPP

#include <functional>
#include <span>
#include <vector>

#include "matching.hpp"

namespace glik {

struct Dataset;

struct ApproxConfig {
  MatchMethod method = MatchMethod::Variational;
  double alpha_eps = 0.1;
  double beta_eps = 0.1;  // binary only
};

// Per-datum Gaussian regression targets replacing one softmax likelihood term.
struct ClassPseudoObs {
  std::vector<double> means;
  std::vector<double> variances;
};

struct BinaryPseudoObs {
  double mean = 0.0;
  double variance = 1.0;
};

// Dirichlet/Gamma construction: class k gets Gamma(alpha_eps + [k == y], 1)
// matched in the log basis.
ClassPseudoObs softmax_pseudo_obs(int y, int num_classes, const ApproxConfig& cfg);

// Beta posterior Beta(alpha_eps + y, beta_eps + 1 - y) matched in the logit basis.
BinaryPseudoObs logistic_pseudo_obs(int y, const ApproxConfig& cfg);

double approx_log_lik(std::span<const double> logits, const ClassPseudoObs& obs);
double approx_log_lik(double logit, const BinaryPseudoObs& obs);

// Trainer maps (dataset, config) to per-example predicted class probabilities
// on the train set (row-major N x K).
using PseudoTrainer =
    std::function<std::vector<std::vector<double>>(const Dataset&, const ApproxConfig&)>;

// Returns the grid element maximizing mean categorical train log-likelihood;
// ties break toward the smaller alpha_eps.
ApproxConfig select_alpha_eps(const Dataset& train, std::span<const double> grid,
                              MatchMethod method, const PseudoTrainer& trainer);

}  // namespace glik

#endif
