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

#include "bayes_linear.hpp"

#include <cmath>
#include <stdexcept>

#include "special_fns.hpp"

namespace glik {

FeatureMap FeatureMap::identity(int dim) {
  FeatureMap f;
  f.kind = Kind::Identity;
  f.output_dim = dim;
  return f;
}

FeatureMap FeatureMap::random_relu(int input_dim, int feature_dim, uint64_t seed) {
  FeatureMap f;
  f.kind = Kind::RandomReLU;
  f.seed = seed;
  f.output_dim = feature_dim;
  f.weight.resize(input_dim, feature_dim);
  f.bias.resize(feature_dim);
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (int i = 0; i < input_dim; ++i) {
    for (int j = 0; j < feature_dim; ++j) f.weight(i, j) = scale * rng.normal();
  }
  for (int j = 0; j < feature_dim; ++j) f.bias(j) = scale * rng.normal();
  return f;
}

FeatureMap FeatureMap::precomputed(int dim) {
  FeatureMap f;
  f.kind = Kind::Precomputed;
  f.output_dim = dim;
  return f;
}

Eigen::VectorXd FeatureMap::apply(const Eigen::VectorXd& x) const {
  switch (kind) {
    case Kind::Identity:
    case Kind::Precomputed:
      return x;
    case Kind::RandomReLU:
      return (weight.transpose() * x + bias).cwiseMax(0.0);
  }
  return x;
}

Eigen::MatrixXd FeatureMap::apply_all(const Eigen::MatrixXd& X) const {
  switch (kind) {
    case Kind::Identity:
    case Kind::Precomputed:
      return X;
    case Kind::RandomReLU:
      return ((X * weight).rowwise() + bias.transpose()).cwiseMax(0.0);
  }
  return X;
}

PosteriorState init_posterior(int dim, int outputs, double prior_variance) {
  if (dim < 1 || outputs < 1 || !(prior_variance > 0.0)) {
    throw std::invalid_argument("init_posterior: invalid arguments");
  }
  PosteriorState s;
  s.prior_variance = prior_variance;
  s.mean.assign(outputs, Eigen::VectorXd::Zero(dim));
  s.cov.assign(outputs, prior_variance * Eigen::MatrixXd::Identity(dim, dim));
  return s;
}

PosteriorState update_one(const PosteriorState& state, const Eigen::VectorXd& phi,
                          const ClassPseudoObs& obs) {
  if (static_cast<int>(obs.means.size()) != state.outputs()) {
    throw std::invalid_argument("update_one: observation/state output mismatch");
  }
  if (phi.size() != state.dim() || !phi.allFinite()) {
    throw std::invalid_argument("update_one: bad feature vector");
  }
  PosteriorState out = state;
  for (int k = 0; k < state.outputs(); ++k) {
    const Eigen::VectorXd s_phi = state.cov[k] * phi;
    const double s = phi.dot(s_phi);
    const double denom = obs.variances[k] + s;
    if (!(denom > 0.0) || !std::isfinite(denom)) {
      throw std::runtime_error("update_one: non-finite update denominator");
    }
    out.cov[k].noalias() = state.cov[k] - (s_phi * s_phi.transpose()) / denom;
    out.cov[k] = 0.5 * (out.cov[k] + out.cov[k].transpose()).eval();
    out.mean[k].noalias() =
        state.mean[k] + s_phi * ((obs.means[k] - phi.dot(state.mean[k])) / denom);
  }
  return out;
}

void update_one_inplace(PosteriorState& state, const Eigen::VectorXd& phi,
                        const ClassPseudoObs& obs) {
  if (static_cast<int>(obs.means.size()) != state.outputs()) {
    throw std::invalid_argument("update_one_inplace: observation/state output mismatch");
  }
  for (int k = 0; k < state.outputs(); ++k) {
    const Eigen::VectorXd s_phi = state.cov[k].selfadjointView<Eigen::Lower>() * phi;
    const double s = phi.dot(s_phi);
    const double denom = obs.variances[k] + s;
    if (!(denom > 0.0) || !std::isfinite(denom)) {
      throw std::runtime_error("update_one_inplace: non-finite update denominator");
    }
    state.cov[k].selfadjointView<Eigen::Lower>().rankUpdate(s_phi, -1.0 / denom);
    state.mean[k].noalias() += s_phi * ((obs.means[k] - phi.dot(state.mean[k])) / denom);
  }
}

void symmetrize(PosteriorState& state) {
  for (auto& c : state.cov) {
    c = c.selfadjointView<Eigen::Lower>();
  }
}

PosteriorState fit_batch(const PosteriorState& state0, const Eigen::MatrixXd& features,
                         const std::vector<ClassPseudoObs>& obs) {
  const int n = static_cast<int>(features.rows());
  if (static_cast<int>(obs.size()) != n) {
    throw std::invalid_argument("fit_batch: features/observations size mismatch");
  }
  if (n == 0) return state0;
  const int d = state0.dim();
  const int kk = state0.outputs();
  PosteriorState out = state0;
  for (int k = 0; k < kk; ++k) {
    Eigen::LLT<Eigen::MatrixXd> prior_llt(state0.cov[k]);
    if (prior_llt.info() != Eigen::Success) {
      throw std::runtime_error("fit_batch: prior covariance not positive-definite");
    }
    Eigen::MatrixXd precision = prior_llt.solve(Eigen::MatrixXd::Identity(d, d));
    Eigen::VectorXd rhs = precision * state0.mean[k];
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd phi = features.row(i).transpose();
      const double inv_v = 1.0 / obs[i].variances[k];
      precision.noalias() += inv_v * (phi * phi.transpose());
      rhs.noalias() += (inv_v * obs[i].means[k]) * phi;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(precision);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("fit_batch: ill-conditioned precision matrix");
    }
    out.cov[k] = llt.solve(Eigen::MatrixXd::Identity(d, d));
    out.cov[k] = 0.5 * (out.cov[k] + out.cov[k].transpose()).eval();
    out.mean[k] = out.cov[k] * rhs;
  }
  return out;
}

Eigen::VectorXd predict_proba(const PosteriorState& state, const Eigen::VectorXd& phi,
                              int n_samples, uint64_t rng_seed) {
  if (n_samples < 1) {
    throw std::invalid_argument("predict_proba: need n_samples >= 1");
  }
  const int kk = state.outputs();
  Eigen::VectorXd mu(kk), sd(kk);
  for (int k = 0; k < kk; ++k) {
    mu(k) = phi.dot(state.mean[k]);
    sd(k) = std::sqrt(std::max(0.0, phi.dot(state.cov[k] * phi)));
  }
  Rng rng(rng_seed);
  if (kk == 1) {
    double acc = 0.0;
    for (int s = 0; s < n_samples; ++s) {
      acc += sigmoid(mu(0) + sd(0) * rng.normal());
    }
    Eigen::VectorXd out(1);
    out(0) = acc / n_samples;
    return out;
  }
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(kk);
  std::vector<double> z(kk);
  for (int s = 0; s < n_samples; ++s) {
    for (int k = 0; k < kk; ++k) z[k] = mu(k) + sd(k) * rng.normal();
    const auto p = softmax(z);
    for (int k = 0; k < kk; ++k) probs(k) += p[k];
  }
  probs /= n_samples;
  probs /= probs.sum();
  return probs;
}

namespace {

Eigen::MatrixXd project_spd(const Eigen::MatrixXd& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

void adf_update_inplace(PosteriorState& state, const Eigen::VectorXd& phi, int y, int n_mc,
                        double damping, uint64_t rng_seed, AdfDiagnostics* diag) {
  if (!(damping > 0.0) || damping > 1.0) {
    throw std::invalid_argument("adf_update: damping must be in (0, 1]");
  }
  if (n_mc < 100) {
    throw std::invalid_argument("adf_update: need n_mc >= 100");
  }
  const int kk = state.outputs();
  if ((kk == 1 && (y < 0 || y > 1)) || (kk > 1 && (y < 0 || y >= kk))) {
    throw std::invalid_argument("adf_update: label out of range");
  }
  Eigen::VectorXd mu(kk), var(kk), sd(kk);
  std::vector<Eigen::VectorXd> s_phi(kk);
  for (int k = 0; k < kk; ++k) {
    s_phi[k] = state.cov[k].selfadjointView<Eigen::Lower>() * phi;
    mu(k) = phi.dot(state.mean[k]);
    var(k) = std::max(1e-300, phi.dot(s_phi[k]));
    sd(k) = std::sqrt(var(k));
  }

  // Tilted logit moments via self-normalized importance sampling from the
  // current marginals.
  Rng rng(rng_seed);
  Eigen::MatrixXd z(n_mc, kk);
  Eigen::VectorXd w(n_mc);
  std::vector<double> logits(kk);
  for (int s = 0; s < n_mc; ++s) {
    for (int k = 0; k < kk; ++k) {
      z(s, k) = mu(k) + sd(k) * rng.normal();
      logits[k] = z(s, k);
    }
    if (kk == 1) {
      const double p = sigmoid(logits[0]);
      w(s) = y == 1 ? p : 1.0 - p;
    } else {
      w(s) = softmax(logits)[y];
    }
  }
  const double sum_w = w.sum();
  const double ess = sum_w * sum_w / w.squaredNorm();
  if (!(ess >= 10.0)) {
    if (diag) diag->skipped_low_ess += 1;
    return;
  }

  for (int k = 0; k < kk; ++k) {
    const double tm = w.dot(z.col(k)) / sum_w;
    const double tv = w.dot(z.col(k).cwiseAbs2()) / sum_w - tm * tm;
    if (!(tv > 0.0) || !std::isfinite(tm)) {
      if (diag) diag->invalid_covariance_fixes += 1;
      continue;
    }
    // Rank-one projection of the marginal moment change onto theta-space.
    // The damped downdate keeps the covariance SPD whenever tv > 0: its
    // coefficient satisfies damping * gain_c * (phi' S phi) < 1.
    const double gain_m = (tm - mu(k)) / var(k);
    const double gain_c = (var(k) - tv) / (var(k) * var(k));
    state.mean[k].noalias() += (damping * gain_m) * s_phi[k];
    state.cov[k].selfadjointView<Eigen::Lower>().rankUpdate(s_phi[k], -damping * gain_c);
    if (state.cov[k].diagonal().minCoeff() <= 0.0) {
      // MC noise pushed a diagonal entry nonpositive; project back to SPD.
      state.cov[k] = project_spd(state.cov[k].selfadjointView<Eigen::Lower>(), 1e-10);
      if (diag) diag->invalid_covariance_fixes += 1;
    }
  }
}

PosteriorState adf_update(const PosteriorState& state, const Eigen::VectorXd& phi, int y,
                          int n_mc, double damping, uint64_t rng_seed,
                          AdfDiagnostics* diag) {
  PosteriorState out = state;
  adf_update_inplace(out, phi, y, n_mc, damping, rng_seed, diag);
  symmetrize(out);
  return out;
}

double sgd_step(SgdState& s, const Eigen::VectorXd& phi, int y, double lr, double momentum) {
  const int kk = static_cast<int>(s.weights.rows());
  const Eigen::VectorXd logits = s.weights * phi;
  double loss;
  Eigen::VectorXd grad_logit(kk);
  if (kk == 1) {
    const double p = sigmoid(logits(0));
    loss = y == 1 ? -std::log(std::max(p, 1e-300)) : -std::log(std::max(1.0 - p, 1e-300));
    grad_logit(0) = p - y;
  } else {
    std::vector<double> l(logits.data(), logits.data() + kk);
    const double lse = log_sum_exp(l);
    loss = lse - logits(y);
    for (int k = 0; k < kk; ++k) grad_logit(k) = std::exp(logits(k) - lse);
    grad_logit(y) -= 1.0;
  }
  s.velocity = momentum * s.velocity + grad_logit * phi.transpose();
  s.weights -= lr * s.velocity;
  return loss;
}

SgdFitResult sgd_momentum_fit(SgdState init, const Eigen::MatrixXd& features,
                              const std::vector<int>& labels, double lr, double momentum) {
  if (!(lr >= 0.0) || momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("sgd_momentum_fit: invalid lr/momentum");
  }
  SgdFitResult res;
  res.state = std::move(init);
  res.losses.reserve(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    const double loss =
        sgd_step(res.state, features.row(static_cast<int>(i)).transpose(), labels[i], lr, momentum);
    if (!std::isfinite(loss)) {
      res.diverged = true;
      break;
    }
    res.losses.push_back(loss);
  }
  return res;
}

}  // namespace glik
