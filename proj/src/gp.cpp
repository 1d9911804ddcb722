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

#include "gp.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "rng.hpp"
#include "special_fns.hpp"

namespace glik {

namespace {

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::VectorXd an = a.rowwise().squaredNorm();
  const Eigen::VectorXd bn = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * a * b.transpose();
  d2.colwise() += an;
  d2.rowwise() += bn.transpose();
  return d2.cwiseMax(0.0);
}

}  // namespace

Eigen::MatrixXd kernel_matrix(const EQKernel& k, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("kernel_matrix: dimension mismatch");
  }
  const double inv2l2 = 0.5 / (k.lengthscale * k.lengthscale);
  return k.variance * (-inv2l2 * squared_distances(a, b)).array().exp().matrix();
}

HeteroGP make_hetero_gp(const Dataset& data, const EQKernel& kernel, const ApproxConfig& cfg,
                        bool binary_single_output) {
  HeteroGP gp;
  gp.inputs = data.features;
  gp.kernel = kernel;
  const int n = data.size();
  if (binary_single_output) {
    if (data.num_classes != 2) {
      throw std::invalid_argument("make_hetero_gp: binary path needs 2 classes");
    }
    gp.targets.resize(n, 1);
    gp.noise.resize(n, 1);
    const BinaryPseudoObs pos = logistic_pseudo_obs(1, cfg);
    const BinaryPseudoObs neg = logistic_pseudo_obs(0, cfg);
    for (int i = 0; i < n; ++i) {
      const BinaryPseudoObs& o = data.labels[i] == 1 ? pos : neg;
      gp.targets(i, 0) = o.mean;
      gp.noise(i, 0) = o.variance;
    }
  } else {
    const int kk = data.num_classes;
    gp.targets.resize(n, kk);
    gp.noise.resize(n, kk);
    // Pseudo-observations depend only on the label; build one per class.
    std::vector<ClassPseudoObs> per_class(kk);
    for (int c = 0; c < kk; ++c) per_class[c] = softmax_pseudo_obs(c, kk, cfg);
    for (int i = 0; i < n; ++i) {
      const ClassPseudoObs& o = per_class[data.labels[i]];
      for (int k = 0; k < kk; ++k) {
        gp.targets(i, k) = o.means[k];
        gp.noise(i, k) = o.variances[k];
      }
    }
  }
  return gp;
}

namespace {

// Cholesky of K + diag(noise) + jitter*I with x10 jitter escalation.
Eigen::LLT<Eigen::MatrixXd> chol_noisy(const Eigen::MatrixXd& gram,
                                       const Eigen::VectorXd& noise, double variance,
                                       double jitter0) {
  Eigen::MatrixXd a = gram;
  a.diagonal() += noise;
  double jitter = jitter0 * variance;
  for (;;) {
    Eigen::MatrixXd aj = a;
    aj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(aj);
    if (llt.info() == Eigen::Success) return llt;
    jitter *= 10.0;
    if (jitter > 1e-4 * std::max(1.0, variance)) {
      throw std::runtime_error("gp: Cholesky failed after jitter escalation");
    }
  }
}

double half_log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

}  // namespace

double log_marginal_likelihood(const HeteroGP& gp) {
  const int n = static_cast<int>(gp.inputs.rows());
  const int kk = static_cast<int>(gp.targets.cols());
  const Eigen::MatrixXd gram = kernel_matrix(gp.kernel, gp.inputs, gp.inputs);
  double total = 0.0;
  for (int k = 0; k < kk; ++k) {
    const auto llt = chol_noisy(gram, gp.noise.col(k), gp.kernel.variance, gp.jitter);
    const Eigen::VectorXd y = gp.targets.col(k);
    const Eigen::VectorXd alpha = llt.solve(y);
    total += -0.5 * y.dot(alpha) - half_log_det(llt) -
             0.5 * n * std::log(2.0 * std::numbers::pi);
  }
  return total;
}

Eigen::Vector2d log_marginal_likelihood_grad(const HeteroGP& gp) {
  const int n = static_cast<int>(gp.inputs.rows());
  const int kk = static_cast<int>(gp.targets.cols());
  const Eigen::MatrixXd d2 = squared_distances(gp.inputs, gp.inputs);
  const double l2 = gp.kernel.lengthscale * gp.kernel.lengthscale;
  const Eigen::MatrixXd gram =
      gp.kernel.variance * (-0.5 / l2 * d2).array().exp().matrix();
  const Eigen::MatrixXd d_lnl = gram.cwiseProduct(d2) / l2;  // dK/d ln lengthscale
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();            // (ln variance, ln lengthscale)
  for (int k = 0; k < kk; ++k) {
    const auto llt = chol_noisy(gram, gp.noise.col(k), gp.kernel.variance, gp.jitter);
    const Eigen::VectorXd alpha = llt.solve(gp.targets.col(k));
    const Eigen::MatrixXd ainv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd g = alpha * alpha.transpose() - ainv;
    grad(0) += 0.5 * g.cwiseProduct(gram).sum();
    grad(1) += 0.5 * g.cwiseProduct(d_lnl).sum();
  }
  return grad;
}

LandscapeResult landscape(const Dataset& data, const std::vector<double>& log_lengthscales,
                          const std::vector<double>& log_variances, const ApproxConfig& cfg) {
  if (log_lengthscales.empty() || log_variances.empty()) {
    throw std::invalid_argument("landscape: empty grid");
  }
  LandscapeResult res;
  res.log_lengthscales = log_lengthscales;
  res.log_variances = log_variances;
  res.log_ml.resize(static_cast<int>(log_lengthscales.size()),
                    static_cast<int>(log_variances.size()));
  HeteroGP gp = make_hetero_gp(data, EQKernel{}, cfg);
  for (size_t i = 0; i < log_lengthscales.size(); ++i) {
    for (size_t j = 0; j < log_variances.size(); ++j) {
      gp.kernel.lengthscale = std::exp(log_lengthscales[i]);
      gp.kernel.variance = std::exp(log_variances[j]);
      double v;
      try {
        v = log_marginal_likelihood(gp);
      } catch (const std::exception&) {
        v = std::numeric_limits<double>::quiet_NaN();
      }
      res.log_ml(static_cast<int>(i), static_cast<int>(j)) = v;
    }
  }
  return res;
}

namespace {

// Minimal 2-D Nelder-Mead minimizer with an evaluation budget.
std::pair<Eigen::Vector2d, double> nelder_mead2(
    const std::function<double(const Eigen::Vector2d&)>& f, Eigen::Vector2d x0, double step,
    int budget) {
  struct Vert {
    Eigen::Vector2d x;
    double v;
  };
  int evals = 0;
  auto eval = [&](const Eigen::Vector2d& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  std::array<Vert, 3> s;
  s[0] = {x0, eval(x0)};
  s[1] = {x0 + Eigen::Vector2d(step, 0), 0.0};
  s[1].v = eval(s[1].x);
  s[2] = {x0 + Eigen::Vector2d(0, step), 0.0};
  s[2].v = eval(s[2].x);
  while (evals < budget) {
    std::sort(s.begin(), s.end(), [](const Vert& a, const Vert& b) { return a.v < b.v; });
    if (std::abs(s[2].v - s[0].v) < 1e-10 && (s[2].x - s[0].x).norm() < 1e-8) break;
    const Eigen::Vector2d centroid = 0.5 * (s[0].x + s[1].x);
    const Eigen::Vector2d refl = centroid + (centroid - s[2].x);
    const double fr = eval(refl);
    if (fr < s[0].v) {
      const Eigen::Vector2d expd = centroid + 2.0 * (centroid - s[2].x);
      const double fe = eval(expd);
      s[2] = fe < fr ? Vert{expd, fe} : Vert{refl, fr};
    } else if (fr < s[1].v) {
      s[2] = {refl, fr};
    } else {
      const Eigen::Vector2d contr = centroid + 0.5 * (s[2].x - centroid);
      const double fc = eval(contr);
      if (fc < s[2].v) {
        s[2] = {contr, fc};
      } else {
        s[1].x = s[0].x + 0.5 * (s[1].x - s[0].x);
        s[1].v = eval(s[1].x);
        s[2].x = s[0].x + 0.5 * (s[2].x - s[0].x);
        s[2].v = eval(s[2].x);
      }
    }
  }
  std::sort(s.begin(), s.end(), [](const Vert& a, const Vert& b) { return a.v < b.v; });
  return {s[0].x, s[0].v};
}

}  // namespace

EQKernel fit_hyperparams(const Dataset& data, const ApproxConfig& cfg, const EQKernel& init,
                         int budget) {
  if (budget < 1) {
    throw std::invalid_argument("fit_hyperparams: budget must be >= 1");
  }
  HeteroGP gp = make_hetero_gp(data, init, cfg);
  int failures = 0;
  auto objective = [&](const Eigen::Vector2d& x) {
    gp.kernel.variance = std::exp(x(0));
    gp.kernel.lengthscale = std::exp(x(1));
    try {
      return -log_marginal_likelihood(gp);
    } catch (const std::exception&) {
      ++failures;
      return std::numeric_limits<double>::infinity();
    }
  };
  const Eigen::Vector2d x_init(std::log(init.variance), std::log(init.lengthscale));
  Eigen::Vector2d best_x = x_init;
  double best = objective(x_init);
  if (budget > 1) {
    const std::array<Eigen::Vector2d, 3> starts{x_init, x_init + Eigen::Vector2d(1.0, 1.0),
                                                x_init - Eigen::Vector2d(1.0, 1.0)};
    const int per_start = std::max(1, (budget - 1) / 3);
    for (const auto& s : starts) {
      auto [x, v] = nelder_mead2(objective, s, 0.5, per_start);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
  }
  if (!std::isfinite(best)) {
    throw std::runtime_error("fit_hyperparams: all starts failed numerically");
  }
  return {std::exp(best_x(0)), std::exp(best_x(1))};
}

LatentPrediction predict_latent(const HeteroGP& gp, const Eigen::MatrixXd& x_star) {
  const int m = static_cast<int>(x_star.rows());
  const int kk = static_cast<int>(gp.targets.cols());
  const Eigen::MatrixXd gram = kernel_matrix(gp.kernel, gp.inputs, gp.inputs);
  const Eigen::MatrixXd cross = kernel_matrix(gp.kernel, gp.inputs, x_star);  // N x m
  LatentPrediction pred;
  pred.mean.resize(m, kk);
  pred.variance.resize(m, kk);
  for (int k = 0; k < kk; ++k) {
    const auto llt = chol_noisy(gram, gp.noise.col(k), gp.kernel.variance, gp.jitter);
    pred.mean.col(k) = cross.transpose() * llt.solve(gp.targets.col(k));
    const Eigen::MatrixXd v = llt.matrixL().solve(cross);
    pred.variance.col(k) =
        (gp.kernel.variance - v.colwise().squaredNorm().array()).cwiseMax(1e-12);
  }
  return pred;
}

Eigen::MatrixXd predict_class_proba(const HeteroGP& gp, const Eigen::MatrixXd& x_star,
                                    int n_samples, uint64_t rng_seed) {
  if (n_samples < 1) {
    throw std::invalid_argument("predict_class_proba: need n_samples >= 1");
  }
  const LatentPrediction pred = predict_latent(gp, x_star);
  const int m = static_cast<int>(x_star.rows());
  const int kk = static_cast<int>(gp.targets.cols());
  const int out_k = kk == 1 ? 2 : kk;
  Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(m, out_k);
  for (int i = 0; i < m; ++i) {
    Rng rng(derive_seed(rng_seed, static_cast<uint64_t>(i)));
    if (kk == 1) {
      const double mu = pred.mean(i, 0);
      const double sd = std::sqrt(pred.variance(i, 0));
      double acc = 0.0;
      for (int s = 0; s < n_samples; ++s) acc += sigmoid(mu + sd * rng.normal());
      acc /= n_samples;
      probs(i, 0) = 1.0 - acc;
      probs(i, 1) = acc;
    } else {
      std::vector<double> logits(kk);
      for (int s = 0; s < n_samples; ++s) {
        for (int k = 0; k < kk; ++k) {
          logits[k] = pred.mean(i, k) + std::sqrt(pred.variance(i, k)) * rng.normal();
        }
        const auto p = softmax(logits);
        for (int k = 0; k < kk; ++k) probs(i, k) += p[k];
      }
      probs.row(i) /= probs.row(i).sum();
    }
  }
  return probs;
}

double elbo(const Dataset& data, const EQKernel& kernel, const ApproxConfig& cfg, int n_mc,
            uint64_t rng_seed) {
  if (n_mc < 1) {
    throw std::invalid_argument("elbo: need n_mc >= 1");
  }
  const HeteroGP gp = make_hetero_gp(data, kernel, cfg);
  const int n = data.size();
  const int kk = static_cast<int>(gp.targets.cols());
  const Eigen::MatrixXd gram = kernel_matrix(kernel, gp.inputs, gp.inputs);

  double kl_total = 0.0;
  Eigen::MatrixXd q_mean(n, kk), q_var(n, kk);
  for (int k = 0; k < kk; ++k) {
    const auto llt = chol_noisy(gram, gp.noise.col(k), kernel.variance, gp.jitter);
    const Eigen::VectorXd y = gp.targets.col(k);
    const Eigen::VectorXd alpha = llt.solve(y);
    // KL(q || prior) with q = N(K A^-1 y, K A^-1 V), A = K + V:
    //   0.5 [ y' A^-1 K A^-1 y - tr(A^-1 K) + ln|A| - sum ln v ]
    const Eigen::MatrixXd ainv_k = llt.solve(gram);
    kl_total += 0.5 * (alpha.dot(gram * alpha) - ainv_k.trace() + 2.0 * half_log_det(llt) -
                       gp.noise.col(k).array().log().sum());
    q_mean.col(k) = gram * alpha;
    const Eigen::MatrixXd w = llt.matrixL().solve(gram);
    q_var.col(k) = (gram.diagonal().array() - w.colwise().squaredNorm().transpose().array())
                       .cwiseMax(1e-12);
  }
  if (!std::isfinite(kl_total)) {
    throw std::runtime_error("elbo: non-finite KL term");
  }

  // Expected log-likelihood by per-point marginal sampling.
  double ell = 0.0;
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(rng_seed, static_cast<uint64_t>(i)));
    double acc = 0.0;
    if (kk == 1) {
      const double mu = q_mean(i, 0);
      const double sd = std::sqrt(q_var(i, 0));
      for (int s = 0; s < n_mc; ++s) {
        const double z = mu + sd * rng.normal();
        acc += data.labels[i] == 1 ? -softplus(-z) : -softplus(z);
      }
    } else {
      std::vector<double> logits(kk);
      for (int s = 0; s < n_mc; ++s) {
        for (int k = 0; k < kk; ++k) {
          logits[k] = q_mean(i, k) + std::sqrt(q_var(i, k)) * rng.normal();
        }
        acc += logits[data.labels[i]] - log_sum_exp(logits);
      }
    }
    ell += acc / n_mc;
  }
  return ell - kl_total;
}

AlphaEpsResult optimize_alpha_eps(const Dataset& data, const EQKernel& init_kernel,
                                  MatchMethod method, const std::vector<double>& alpha_grid,
                                  int budget, int n_mc, uint64_t rng_seed) {
  if (budget < 1 || alpha_grid.empty()) {
    throw std::invalid_argument("optimize_alpha_eps: need budget >= 1 and a nonempty grid");
  }
  AlphaEpsResult res;
  res.config = ApproxConfig{method, alpha_grid.front(), alpha_grid.front()};
  res.kernel = init_kernel;
  res.elbo_value = elbo(data, res.kernel, res.config, n_mc, rng_seed);
  for (int round = 1; round < budget; ++round) {
    // Coordinate 1: alpha_eps over the grid.
    for (double a : alpha_grid) {
      ApproxConfig cfg{method, a, a};
      double v;
      try {
        v = elbo(data, res.kernel, cfg, n_mc, rng_seed);
      } catch (const std::exception&) {
        continue;
      }
      if (v > res.elbo_value) {
        res.elbo_value = v;
        res.config = cfg;
      }
    }
    // Coordinate 2: kernel hyperparameters by Nelder-Mead on the ELBO.
    auto objective = [&](const Eigen::Vector2d& x) {
      EQKernel k{std::exp(x(0)), std::exp(x(1))};
      try {
        return -elbo(data, k, res.config, n_mc, rng_seed);
      } catch (const std::exception&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    auto [x, v] = nelder_mead2(
        objective,
        Eigen::Vector2d(std::log(res.kernel.variance), std::log(res.kernel.lengthscale)), 0.3,
        20);
    if (-v > res.elbo_value) {
      res.elbo_value = -v;
      res.kernel = {std::exp(x(0)), std::exp(x(1))};
    }
  }
  return res;
}

}  // namespace glik
