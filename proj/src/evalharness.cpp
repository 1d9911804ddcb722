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

#include "evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rng.hpp"
#include "special_fns.hpp"

namespace glik {

namespace {

void check_probs(const Eigen::MatrixXd& probs, const std::vector<int>& labels) {
  if (probs.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw std::invalid_argument("metrics: probs/labels shape mismatch");
  }
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    if (std::abs(probs.row(i).sum() - 1.0) > 1e-6) {
      throw std::invalid_argument("metrics: probability row " + std::to_string(i) +
                                  " does not sum to 1");
    }
    if (labels[i] < 0 || labels[i] >= probs.cols()) {
      throw std::invalid_argument("metrics: label out of range at row " + std::to_string(i));
    }
  }
}

}  // namespace

double accuracy(const Eigen::MatrixXd& probs, const std::vector<int>& labels) {
  check_probs(probs, labels);
  int correct = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    int arg = 0;
    double best = probs(i, 0);
    for (int k = 1; k < probs.cols(); ++k) {
      if (probs(i, k) > best) {  // ties break toward the lowest index
        best = probs(i, k);
        arg = k;
      }
    }
    if (arg == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(probs.rows());
}

double nll(const Eigen::MatrixXd& probs, const std::vector<int>& labels) {
  check_probs(probs, labels);
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    total -= std::log(std::max(probs(i, labels[i]), 1e-12));
  }
  return total / static_cast<double>(probs.rows());
}

double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return std::max(0.0, h);
}

double ece(const Eigen::MatrixXd& probs, const std::vector<int>& labels, int n_bins) {
  check_probs(probs, labels);
  if (n_bins < 1) {
    throw std::invalid_argument("ece: n_bins must be >= 1");
  }
  std::vector<int> count(n_bins, 0), correct(n_bins, 0);
  std::vector<double> conf(n_bins, 0.0);
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    int arg = 0;
    double best = probs(i, 0);
    for (int k = 1; k < probs.cols(); ++k) {
      if (probs(i, k) > best) {
        best = probs(i, k);
        arg = k;
      }
    }
    int b = std::min(n_bins - 1, static_cast<int>(best * n_bins));
    count[b] += 1;
    conf[b] += best;
    if (arg == labels[i]) correct[b] += 1;
  }
  double out = 0.0;
  const double m = static_cast<double>(probs.rows());
  for (int b = 0; b < n_bins; ++b) {
    if (count[b] == 0) continue;
    const double acc_b = static_cast<double>(correct[b]) / count[b];
    const double conf_b = conf[b] / count[b];
    out += (count[b] / m) * std::abs(acc_b - conf_b);
  }
  return out;
}

double roc_auc(const std::vector<double>& scores_pos, const std::vector<double>& scores_neg) {
  if (scores_pos.empty() || scores_neg.empty()) {
    throw std::invalid_argument("roc_auc: empty score set");
  }
  double wins = 0.0;
  for (double p : scores_pos) {
    for (double n : scores_neg) {
      if (p > n) {
        wins += 1.0;
      } else if (p == n) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(scores_pos.size()) * scores_neg.size());
}

std::string stream_method_name(StreamMethod m) {
  switch (m) {
    case StreamMethod::Gauss:
      return "gauss";
    case StreamMethod::MomentOri:
      return "moment-ori";
    case StreamMethod::Moment:
      return "moment";
    case StreamMethod::Laplace:
      return "laplace";
    case StreamMethod::Variational:
      return "variational";
    case StreamMethod::Adf:
      return "adf";
    case StreamMethod::SgdM:
      return "sgd+m";
  }
  return "?";
}

std::optional<StreamMethod> parse_stream_method(const std::string& name) {
  for (StreamMethod m :
       {StreamMethod::Gauss, StreamMethod::MomentOri, StreamMethod::Moment, StreamMethod::Laplace,
        StreamMethod::Variational, StreamMethod::Adf, StreamMethod::SgdM}) {
    if (stream_method_name(m) == name) return m;
  }
  return std::nullopt;
}

namespace {

std::optional<MatchMethod> pseudo_obs_method(StreamMethod m) {
  switch (m) {
    case StreamMethod::MomentOri:
      return MatchMethod::MomentOri;
    case StreamMethod::Moment:
      return MatchMethod::Moment;
    case StreamMethod::Laplace:
      return MatchMethod::Laplace;
    case StreamMethod::Variational:
      return MatchMethod::Variational;
    default:
      return std::nullopt;  // gauss handled separately; adf/sgd are not conjugate
  }
}

// Per-class Gaussian regression targets for every conjugate method, including
// the one-hot/unit-variance baseline.
std::vector<ClassPseudoObs> conjugate_obs_table(StreamMethod method, int num_classes,
                                                const ApproxConfig& base) {
  std::vector<ClassPseudoObs> table(num_classes);
  if (method == StreamMethod::Gauss) {
    for (int c = 0; c < num_classes; ++c) {
      table[c].means.assign(num_classes, 0.0);
      table[c].variances.assign(num_classes, 1.0);
      table[c].means[c] = 1.0;
    }
    return table;
  }
  ApproxConfig cfg = base;
  cfg.method = *pseudo_obs_method(method);
  for (int c = 0; c < num_classes; ++c) table[c] = softmax_pseudo_obs(c, num_classes, cfg);
  return table;
}

// Batched Monte Carlo class probabilities from the per-point logit marginals of
// a Gaussian posterior. Row i uses a seed derived from (eval_seed, i).
Eigen::MatrixXd posterior_proba_batch(const PosteriorState& state, const Eigen::MatrixXd& phi,
                                      int n_samples, uint64_t eval_seed) {
  const int m = static_cast<int>(phi.rows());
  const int kk = state.outputs();
  Eigen::MatrixXd mu(m, kk), sd(m, kk);
  for (int k = 0; k < kk; ++k) {
    mu.col(k) = phi * state.mean[k];
    // diag(phi Sigma phi') via one matrix product per output
    const Eigen::MatrixXd half = phi * state.cov[k];
    sd.col(k) = half.cwiseProduct(phi).rowwise().sum().cwiseMax(0.0).cwiseSqrt();
  }
  const int out_k = kk == 1 ? 2 : kk;
  Eigen::MatrixXd probs(m, out_k);
  std::vector<double> z(kk);
  for (int i = 0; i < m; ++i) {
    Rng rng(derive_seed(eval_seed, static_cast<uint64_t>(i)));
    if (kk == 1) {
      double acc = 0.0;
      for (int s = 0; s < n_samples; ++s) acc += sigmoid(mu(i, 0) + sd(i, 0) * rng.normal());
      acc /= n_samples;
      probs(i, 0) = 1.0 - acc;
      probs(i, 1) = acc;
    } else {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(kk);
      for (int s = 0; s < n_samples; ++s) {
        for (int k = 0; k < kk; ++k) z[k] = mu(i, k) + sd(i, k) * rng.normal();
        const auto p = softmax(z);
        for (int k = 0; k < kk; ++k) row(k) += p[k];
      }
      probs.row(i) = row / row.sum();
    }
  }
  return probs;
}

Eigen::MatrixXd sgd_proba_batch(const SgdState& state, const Eigen::MatrixXd& phi) {
  const int m = static_cast<int>(phi.rows());
  const int kk = static_cast<int>(state.weights.rows());
  const Eigen::MatrixXd logits = phi * state.weights.transpose();
  const int out_k = kk == 1 ? 2 : kk;
  Eigen::MatrixXd probs(m, out_k);
  for (int i = 0; i < m; ++i) {
    if (kk == 1) {
      const double p = sigmoid(logits(i, 0));
      probs(i, 0) = 1.0 - p;
      probs(i, 1) = p;
    } else {
      std::vector<double> z(logits.row(i).data(), logits.row(i).data() + kk);
      // Row of logits is not contiguous in a row access of a column-major
      // matrix; copy explicitly.
      for (int k = 0; k < kk; ++k) z[k] = logits(i, k);
      const auto p = softmax(z);
      for (int k = 0; k < kk; ++k) probs(i, k) = p[k];
    }
  }
  return probs;
}

}  // namespace

StreamRunResult streaming_run(const Dataset& train, const Dataset& test, StreamMethod method,
                              const FeatureMap& fmap, const StreamConfig& cfg,
                              uint64_t rng_seed) {
  if (cfg.cadence < 1) {
    throw std::invalid_argument("streaming_run: cadence must be >= 1");
  }
  if (train.num_classes != test.num_classes) {
    throw std::invalid_argument("streaming_run: train/test class count mismatch");
  }
  const int n = train.size();
  const int kk = train.num_classes;
  const Eigen::MatrixXd phi_train = fmap.apply_all(train.features);
  const Eigen::MatrixXd phi_test = fmap.apply_all(test.features);
  const int d = static_cast<int>(phi_train.cols());

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(derive_seed(rng_seed, 0));
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(shuffle_rng.below(i + 1));
    std::swap(order[i], order[j]);
  }

  StreamRunResult res;
  const bool is_sgd = method == StreamMethod::SgdM;
  std::vector<ClassPseudoObs> obs_table;
  if (!is_sgd && method != StreamMethod::Adf) {
    obs_table = conjugate_obs_table(method, kk, cfg.approx);
  }
  PosteriorState post;
  SgdState sgd;
  if (is_sgd) {
    sgd.weights = Eigen::MatrixXd::Zero(kk, d);
    sgd.velocity = Eigen::MatrixXd::Zero(kk, d);
  } else {
    post = init_posterior(d, kk, cfg.prior_variance);
  }

  int step = 0;
  auto evaluate = [&](int seen) {
    const uint64_t eval_seed = derive_seed(rng_seed, 1000 + step);
    if (!is_sgd) symmetrize(post);
    const Eigen::MatrixXd probs =
        is_sgd ? sgd_proba_batch(sgd, phi_test)
               : posterior_proba_batch(post, phi_test, cfg.predict_samples, eval_seed);
    StreamRecord rec;
    rec.step = step++;
    rec.seen = seen;
    rec.test_accuracy = accuracy(probs, test.labels);
    rec.test_loglik = -nll(probs, test.labels);
    res.records.push_back(rec);
  };

  for (int i = 0; i < n; ++i) {
    const int idx = order[i];
    const Eigen::VectorXd phi = phi_train.row(idx).transpose();
    const int y = train.labels[idx];
    if (is_sgd) {
      sgd_step(sgd, phi, y, cfg.sgd_lr, cfg.sgd_momentum);
    } else if (method == StreamMethod::Adf) {
      adf_update_inplace(post, phi, y, cfg.adf_mc, cfg.adf_damping,
                         derive_seed(rng_seed, 2000000 + i), &res.adf_diag);
    } else {
      update_one_inplace(post, phi, obs_table[y]);
    }
    const int seen = i + 1;
    if (seen % cfg.cadence == 0 && seen != n) evaluate(seen);
  }
  evaluate(n);

  if (is_sgd) {
    res.sgd = std::move(sgd);
  } else {
    res.posterior = std::move(post);
  }
  return res;
}

std::vector<ALRecord> active_learning_run(const Dataset& pool, const Dataset& test,
                                          const ALConfig& cfg, uint64_t rng_seed) {
  if (pool.num_classes != 2 || test.num_classes != 2) {
    throw std::invalid_argument("active_learning_run: binary pools only");
  }
  if (cfg.init_size < 1 || cfg.steps < 0 ||
      cfg.steps > pool.size() - cfg.init_size) {
    throw std::invalid_argument("active_learning_run: init_size/steps out of range");
  }

  const int d = pool.dim();
  const BinaryPseudoObs obs_pos = logistic_pseudo_obs(1, cfg.approx);
  const BinaryPseudoObs obs_neg = logistic_pseudo_obs(0, cfg.approx);
  auto as_class_obs = [](const BinaryPseudoObs& o) {
    ClassPseudoObs c;
    c.means = {o.mean};
    c.variances = {o.variance};
    return c;
  };

  std::vector<int> remaining(pool.size());
  std::iota(remaining.begin(), remaining.end(), 0);
  Rng rng(derive_seed(rng_seed, 0));
  for (int i = pool.size() - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(i + 1));
    std::swap(remaining[i], remaining[j]);
  }

  PosteriorState post = init_posterior(d, 1, cfg.prior_variance);
  int train_size = 0;
  auto add_point = [&](int pool_idx) {
    const Eigen::VectorXd phi = pool.features.row(pool_idx).transpose();
    post = update_one(post, phi,
                      as_class_obs(pool.labels[pool_idx] == 1 ? obs_pos : obs_neg));
    ++train_size;
  };
  for (int i = 0; i < cfg.init_size; ++i) add_point(remaining[i]);
  remaining.erase(remaining.begin(), remaining.begin() + cfg.init_size);
  std::sort(remaining.begin(), remaining.end());

  std::vector<ALRecord> records;
  auto record = [&](int step, int chosen) {
    const uint64_t eval_seed = derive_seed(rng_seed, 1000 + step);
    const Eigen::MatrixXd probs =
        posterior_proba_batch(post, test.features, cfg.predict_samples, eval_seed);
    ALRecord rec;
    rec.step = step;
    rec.train_size = train_size;
    rec.test_accuracy = accuracy(probs, test.labels);
    rec.test_loglik = -nll(probs, test.labels);
    rec.chosen_index = chosen;
    records.push_back(rec);
  };
  record(0, -1);

  for (int step = 1; step <= cfg.steps; ++step) {
    int chosen_pos = 0;
    if (cfg.acquisition == Acquisition::Random) {
      chosen_pos = static_cast<int>(rng.below(remaining.size()));
    } else {
      const uint64_t acq_seed = derive_seed(rng_seed, 2000000 + step);
      Eigen::MatrixXd pool_feat(static_cast<int>(remaining.size()), d);
      for (size_t i = 0; i < remaining.size(); ++i) {
        pool_feat.row(static_cast<int>(i)) = pool.features.row(remaining[i]);
      }
      const Eigen::MatrixXd probs =
          posterior_proba_batch(post, pool_feat, cfg.predict_samples, acq_seed);
      double best = -1.0;
      for (size_t i = 0; i < remaining.size(); ++i) {
        const double h = entropy({probs(static_cast<int>(i), 0), probs(static_cast<int>(i), 1)});
        if (h > best) {  // strict: ties keep the lowest pool index
          best = h;
          chosen_pos = static_cast<int>(i);
        }
      }
    }
    const int pool_idx = remaining[chosen_pos];
    add_point(pool_idx);
    remaining.erase(remaining.begin() + chosen_pos);
    record(step, pool_idx);
  }
  return records;
}

DirichletCheckReport dirichlet_construction_check(const std::vector<double>& alpha,
                                                  int n_samples, uint64_t rng_seed) {
  const int kk = static_cast<int>(alpha.size());
  if (kk < 2) {
    throw std::invalid_argument("dirichlet_construction_check: need at least 2 components");
  }
  if (n_samples < 10000) {
    throw std::invalid_argument("dirichlet_construction_check: need n_samples >= 1e4");
  }
  for (double a : alpha) {
    if (!(a > 0.0)) {
      throw std::invalid_argument("dirichlet_construction_check: alpha entries must be > 0");
    }
  }
  const double a0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);

  Rng rng(rng_seed);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(kk);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(kk, kk);
  Eigen::VectorXd pi(kk);
  int corner_count = 0;
  for (int s = 0; s < n_samples; ++s) {
    double total = 0.0;
    for (int k = 0; k < kk; ++k) {
      pi(k) = rng.gamma(alpha[k]);
      total += pi(k);
    }
    pi /= total;
    mean += pi;
    second += pi * pi.transpose();
    if (pi.maxCoeff() > 0.9) ++corner_count;
  }
  mean /= n_samples;
  second /= n_samples;

  DirichletCheckReport rep;
  rep.frac_max_above = static_cast<double>(corner_count) / n_samples;
  rep.max_abs_z = 0.0;
  for (int i = 0; i < kk; ++i) {
    const double m_true = alpha[i] / a0;
    const double v_true = alpha[i] * (a0 - alpha[i]) / (a0 * a0 * (a0 + 1.0));
    const double se = std::sqrt(v_true / n_samples);
    rep.empirical_mean.push_back(mean(i));
    rep.analytic_mean.push_back(m_true);
    rep.mean_stderr.push_back(se);
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(mean(i) - m_true) / se);
    for (int j = 0; j < i; ++j) {
      const double cov_emp = second(i, j) - mean(i) * mean(j);
      const double cov_true = -alpha[i] * alpha[j] / (a0 * a0 * (a0 + 1.0));
      // Normal-approximation standard error for a sampled covariance entry.
      const double var_ij = second(i, j) - cov_true * cov_true;  // E[(pi_i pi_j)^2] proxy
      const double se_cov = std::sqrt(std::max(var_ij, 1e-12) / n_samples);
      rep.max_abs_z = std::max(rep.max_abs_z, std::abs(cov_emp - cov_true) / se_cov);
    }
  }
  return rep;
}

}  // namespace glik
