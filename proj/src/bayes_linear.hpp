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

#ifndef GLIK_BAYES_LINEAR_HPP
#define GLIK_BAYES_LINEAR_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "likelihood_approx.hpp"
#include "rng.hpp"

namespace glik {

// Fixed feature extraction in front of the linear model.
struct FeatureMap {
  enum class Kind { Identity, RandomReLU, Precomputed };
  Kind kind = Kind::Identity;
  Eigen::MatrixXd weight;  // D_in x D_feat, RandomReLU only
  Eigen::VectorXd bias;    // D_feat, RandomReLU only
  uint64_t seed = 0;
  int output_dim = 0;

  static FeatureMap identity(int dim);
  // Entries i.i.d. N(0, 1/D_in), reconstructible from the seed.
  static FeatureMap random_relu(int input_dim, int feature_dim, uint64_t seed);
  static FeatureMap precomputed(int dim);

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply_all(const Eigen::MatrixXd& X) const;
};

// Independent full-covariance Gaussian posterior per output dimension.
struct PosteriorState {
  std::vector<Eigen::VectorXd> mean;  // K vectors of size D
  std::vector<Eigen::MatrixXd> cov;   // K matrices D x D
  double prior_variance = 1.0;

  int dim() const { return mean.empty() ? 0 : static_cast<int>(mean[0].size()); }
  int outputs() const { return static_cast<int>(mean.size()); }
};

PosteriorState init_posterior(int dim, int outputs, double prior_variance);

// Exact conjugate rank-one update with one heteroscedastic pseudo-observation,
// Joseph-symmetrized covariance form.
PosteriorState update_one(const PosteriorState& state, const Eigen::VectorXd& phi,
                          const ClassPseudoObs& obs);

// Same rank-one update without copying the state; touches only the lower
// triangles of the covariances (symmetric by construction). Mirror with
// symmetrize() before handing the state to full-matrix consumers.
void update_one_inplace(PosteriorState& state, const Eigen::VectorXd& phi,
                        const ClassPseudoObs& obs);
void symmetrize(PosteriorState& state);

// Closed-form batch posterior via per-output Cholesky solve.
PosteriorState fit_batch(const PosteriorState& state0, const Eigen::MatrixXd& features,
                         const std::vector<ClassPseudoObs>& obs);

// Monte Carlo softmax-averaged class probabilities (sigmoid for a single
// logit). Zero-variance posteriors reduce to the deterministic warp.
Eigen::VectorXd predict_proba(const PosteriorState& state, const Eigen::VectorXd& phi,
                              int n_samples, uint64_t rng_seed);

struct AdfDiagnostics {
  int invalid_covariance_fixes = 0;
  int skipped_low_ess = 0;
};

// Assumed density filtering step: tilted moments per output by self-normalized
// importance sampling from the current logit marginals, blended by `damping`.
PosteriorState adf_update(const PosteriorState& state, const Eigen::VectorXd& phi, int y,
                          int n_mc, double damping, uint64_t rng_seed,
                          AdfDiagnostics* diag = nullptr);

// Copy-free variant for streaming; lower-triangle discipline as in
// update_one_inplace.
void adf_update_inplace(PosteriorState& state, const Eigen::VectorXd& phi, int y, int n_mc,
                        double damping, uint64_t rng_seed, AdfDiagnostics* diag = nullptr);

struct SgdState {
  Eigen::MatrixXd weights;   // K x D
  Eigen::MatrixXd velocity;  // K x D
};

// One per-observation SGD+momentum step on categorical cross-entropy of
// softmax(W phi) (sigmoid cross-entropy when K == 1). Returns the loss at the
// pre-update weights.
double sgd_step(SgdState& s, const Eigen::VectorXd& phi, int y, double lr, double momentum);

struct SgdFitResult {
  SgdState state;
  std::vector<double> losses;
  bool diverged = false;
};

SgdFitResult sgd_momentum_fit(SgdState init, const Eigen::MatrixXd& features,
                              const std::vector<int>& labels, double lr, double momentum);

}  // namespace glik

#endif
