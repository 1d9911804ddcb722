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

#ifndef GLIK_GP_HPP
#define GLIK_GP_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "dataset.hpp"
#include "likelihood_approx.hpp"

namespace glik {

// Exponentiated-quadratic kernel.
struct EQKernel {
  double variance = 1.0;
  double lengthscale = 1.0;
};

Eigen::MatrixXd kernel_matrix(const EQKernel& k, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b);

// Exact GP regression with per-point, per-output noise; zero prior mean.
struct HeteroGP {
  Eigen::MatrixXd inputs;   // N x D
  Eigen::MatrixXd targets;  // N x K pseudo-observation means
  Eigen::MatrixXd noise;    // N x K pseudo-observation variances, > 0
  EQKernel kernel;
  double jitter = 1e-8;
};

// Builds targets/noise from labels via softmax (K >= 2) or logistic (binary,
// single output) pseudo-observations.
HeteroGP make_hetero_gp(const Dataset& data, const EQKernel& kernel,
                        const ApproxConfig& cfg, bool binary_single_output = false);

double log_marginal_likelihood(const HeteroGP& gp);

// d logML / d (ln variance, ln lengthscale), analytic trace formula.
Eigen::Vector2d log_marginal_likelihood_grad(const HeteroGP& gp);

struct LandscapeResult {
  std::vector<double> log_lengthscales;
  std::vector<double> log_variances;
  // rows: lengthscale index, cols: variance index; NaN marks a failed cell
  Eigen::MatrixXd log_ml;
};

LandscapeResult landscape(const Dataset& data, const std::vector<double>& log_lengthscales,
                          const std::vector<double>& log_variances, const ApproxConfig& cfg);

// Multi-start Nelder-Mead over (ln variance, ln lengthscale), `budget` logML
// evaluations in total.
EQKernel fit_hyperparams(const Dataset& data, const ApproxConfig& cfg, const EQKernel& init,
                         int budget);

struct LatentPrediction {
  Eigen::MatrixXd mean;      // m x K
  Eigen::MatrixXd variance;  // m x K, clamped to >= 1e-12
};

LatentPrediction predict_latent(const HeteroGP& gp, const Eigen::MatrixXd& x_star);

Eigen::MatrixXd predict_class_proba(const HeteroGP& gp, const Eigen::MatrixXd& x_star,
                                    int n_samples, uint64_t rng_seed);

// Appendix-style evidence lower bound: closed-form KL between the
// heteroscedastic-regression posterior and the GP prior, plus a Monte Carlo
// expected categorical log-likelihood from the per-point marginals of q.
double elbo(const Dataset& data, const EQKernel& kernel, const ApproxConfig& cfg, int n_mc,
            uint64_t rng_seed);

struct AlphaEpsResult {
  ApproxConfig config;
  EQKernel kernel;
  double elbo_value = 0.0;
};

// Coordinate ascent over ln alpha_eps and the kernel hyperparameters.
AlphaEpsResult optimize_alpha_eps(const Dataset& data, const EQKernel& init_kernel,
                                  MatchMethod method, const std::vector<double>& alpha_grid,
                                  int budget, int n_mc, uint64_t rng_seed);

}  // namespace glik

#endif
