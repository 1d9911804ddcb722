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

#ifndef GLIK_EVALHARNESS_HPP
#define GLIK_EVALHARNESS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bayes_linear.hpp"
#include "dataset.hpp"
#include "likelihood_approx.hpp"

namespace glik {

// ---- metrics ----

double accuracy(const Eigen::MatrixXd& probs, const std::vector<int>& labels);
// Mean negative log predicted probability of the true class, floored at 1e-12.
double nll(const Eigen::MatrixXd& probs, const std::vector<int>& labels);
double entropy(const std::vector<double>& p);
double ece(const Eigen::MatrixXd& probs, const std::vector<int>& labels, int n_bins = 15);
// Mann-Whitney estimator, half credit for ties.
double roc_auc(const std::vector<double>& scores_pos, const std::vector<double>& scores_neg);

// ---- streaming replay ----

enum class StreamMethod { Gauss, MomentOri, Moment, Laplace, Variational, Adf, SgdM };

std::string stream_method_name(StreamMethod m);
std::optional<StreamMethod> parse_stream_method(const std::string& name);

struct StreamRecord {
  int step = 0;
  int seen = 0;
  double test_accuracy = 0.0;
  double test_loglik = 0.0;
};

struct StreamConfig {
  ApproxConfig approx;         // conjugate pseudo-observation methods
  double prior_variance = 1.0;
  int cadence = 100;
  int predict_samples = 1024;
  int adf_mc = 512;
  double adf_damping = 0.5;
  double sgd_lr = 0.05;
  double sgd_momentum = 0.9;
};

struct StreamRunResult {
  std::vector<StreamRecord> records;
  std::optional<PosteriorState> posterior;  // conjugate and ADF methods
  std::optional<SgdState> sgd;
  AdfDiagnostics adf_diag;
};

// Replays `train` in a seeded order, updating one observation at a time and
// evaluating on `test` every `cadence` observations (plus a terminal record).
StreamRunResult streaming_run(const Dataset& train, const Dataset& test, StreamMethod method,
                              const FeatureMap& fmap, const StreamConfig& cfg,
                              uint64_t rng_seed);

// ---- pool-based active learning ----

enum class Acquisition { Entropy, Random };

struct ALRecord {
  int step = 0;
  int train_size = 0;
  double test_accuracy = 0.0;
  double test_loglik = 0.0;
  int chosen_index = -1;  // -1 on the initial record
};

struct ALConfig {
  ApproxConfig approx;
  double prior_variance = 1.0;
  int init_size = 10;
  int steps = 50;
  int predict_samples = 1024;
  Acquisition acquisition = Acquisition::Entropy;
};

// Binary pool (single-logit logistic model): seeds with init_size random pool
// points, then repeatedly moves the highest-predictive-entropy pool point
// (lowest index on ties) into the training set via a closed-form update.
std::vector<ALRecord> active_learning_run(const Dataset& pool, const Dataset& test,
                                          const ALConfig& cfg, uint64_t rng_seed);

// ---- Dirichlet construction sampling check ----

struct DirichletCheckReport {
  std::vector<double> empirical_mean;
  std::vector<double> analytic_mean;
  std::vector<double> mean_stderr;
  double max_abs_z = 0.0;          // over means and covariance entries
  double frac_max_above = 0.0;     // fraction of samples with max component > 0.9
};

// Samples omega_k ~ Gamma(alpha_k, 1), normalizes to the simplex, and compares
// empirical moments with the analytic Dirichlet moments.
DirichletCheckReport dirichlet_construction_check(const std::vector<double>& alpha,
                                                  int n_samples, uint64_t rng_seed);

}  // namespace glik

#endif
