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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bayes_linear.hpp"
#include "doctest.h"
#include "likelihood_approx.hpp"
#include "rng.hpp"
#include "special_fns.hpp"

using namespace glik;

namespace {

ClassPseudoObs obs_of(std::vector<double> means, std::vector<double> variances) {
  ClassPseudoObs o;
  o.means = std::move(means);
  o.variances = std::move(variances);
  return o;
}

// Random heteroscedastic instance shared by the permutation / batch tests.
struct Instance {
  Eigen::MatrixXd features;
  std::vector<ClassPseudoObs> obs;
};

Instance random_instance(int n, int d, int k, Rng& rng) {
  Instance inst;
  inst.features = Eigen::MatrixXd(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) inst.features(i, j) = rng.normal();
    std::vector<double> m(k), v(k);
    for (int c = 0; c < k; ++c) {
      m[c] = 2.0 * rng.normal();
      v[c] = 0.2 + 3.0 * rng.uniform();
    }
    inst.obs.push_back(obs_of(m, v));
  }
  return inst;
}

double max_state_diff(const PosteriorState& a, const PosteriorState& b) {
  double worst = 0.0;
  for (int k = 0; k < a.outputs(); ++k) {
    worst = std::max(worst, (a.mean[k] - b.mean[k]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (a.cov[k] - b.cov[k]).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

TEST_CASE("posterior initialization") {
  const PosteriorState s = init_posterior(2, 1, 1.0);
  CHECK(s.mean[0].isZero());
  CHECK((s.cov[0] - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
  Eigen::Vector2d phi(1.0, 0.0);
  CHECK(phi.dot(s.cov[0] * phi) == 1.0);

  const PosteriorState t = init_posterior(1, 3, 4.0);
  CHECK(t.outputs() == 3);
  for (int k = 0; k < 3; ++k) CHECK(t.cov[k](0, 0) == 4.0);
}

TEST_CASE("scalar conjugate updates") {
  const PosteriorState s0 = init_posterior(1, 1, 1.0);
  Eigen::VectorXd phi(1);
  phi << 1.0;
  const PosteriorState s1 = update_one(s0, phi, obs_of({2.0}, {1.0}));
  CHECK(s1.mean[0](0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s1.cov[0](0, 0) == doctest::Approx(0.5).epsilon(1e-12));

  const PosteriorState s2 = update_one(s1, phi, obs_of({2.0}, {1.0}));
  CHECK(s2.mean[0](0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(s2.cov[0](0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("update order invariance") {
  Rng rng(2);
  const PosteriorState s0 = init_posterior(3, 2, 1.0);
  Eigen::VectorXd pa(3), pb(3);
  for (int i = 0; i < 3; ++i) {
    pa(i) = rng.normal();
    pb(i) = rng.normal();
  }
  const auto oa = obs_of({1.0, -0.5}, {0.7, 2.0});
  const auto ob = obs_of({-2.0, 0.3}, {1.3, 0.4});
  const PosteriorState ab = update_one(update_one(s0, pa, oa), pb, ob);
  const PosteriorState ba = update_one(update_one(s0, pb, ob), pa, oa);
  CHECK(max_state_diff(ab, ba) <= 1e-10);
}

TEST_CASE("batch posterior equals sequential updates") {
  Rng rng(4);
  const Instance inst = random_instance(200, 20, 3, rng);
  const PosteriorState s0 = init_posterior(20, 3, 1.0);

  PosteriorState seq = s0;
  for (int i = 0; i < 200; ++i) {
    seq = update_one(seq, inst.features.row(i).transpose(), inst.obs[i]);
  }
  const PosteriorState batch = fit_batch(s0, inst.features, inst.obs);
  CHECK(max_state_diff(seq, batch) <= 1e-8);

  // Empty batch and single observation degenerate cases.
  const PosteriorState empty = fit_batch(s0, Eigen::MatrixXd(0, 20), {});
  CHECK(max_state_diff(empty, s0) == 0.0);
  const PosteriorState one =
      fit_batch(s0, inst.features.topRows(1), {inst.obs[0]});
  const PosteriorState one_seq = update_one(s0, inst.features.row(0).transpose(), inst.obs[0]);
  CHECK(max_state_diff(one, one_seq) <= 1e-10);
}

TEST_CASE("permutation invariance across random instances") {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const int n = 20 + static_cast<int>(rng.below(81));
    const int d = 2 + static_cast<int>(rng.below(9));
    const int k = 1 + static_cast<int>(rng.below(4));
    const Instance inst = random_instance(n, d, k, rng);
    const PosteriorState s0 = init_posterior(d, k, 1.0);
    const PosteriorState batch = fit_batch(s0, inst.features, inst.obs);
    for (int p = 0; p < 5; ++p) {
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      for (int i = n - 1; i > 0; --i) {
        std::swap(order[i], order[static_cast<int>(rng.below(i + 1))]);
      }
      PosteriorState seq = s0;
      for (int i : order) seq = update_one(seq, inst.features.row(i).transpose(), inst.obs[i]);
      CHECK(max_state_diff(seq, batch) <= 1e-8);
    }
  }
}

TEST_CASE("updates contract the covariance") {
  Rng rng(8);
  const Instance inst = random_instance(30, 5, 2, rng);
  PosteriorState s = init_posterior(5, 2, 1.0);
  for (int i = 0; i < 30; ++i) {
    const double before = s.cov[0].trace() + s.cov[1].trace();
    s = update_one(s, inst.features.row(i).transpose(), inst.obs[i]);
    CHECK(s.cov[0].trace() + s.cov[1].trace() < before);
  }
  // Eigenvalues never exceed the prior variance.
  for (int k = 0; k < 2; ++k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.cov[k]);
    CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-8);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("homoscedastic posterior mean is the ridge solution") {
  Rng rng(10);
  const int n = 60, d = 7;
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
    y(i) = rng.normal();
  }
  const double v = 0.8, prior_var = 2.5;
  std::vector<ClassPseudoObs> obs;
  for (int i = 0; i < n; ++i) obs.push_back(obs_of({y(i)}, {v}));
  const PosteriorState post = fit_batch(init_posterior(d, 1, prior_var), x, obs);

  const Eigen::MatrixXd a =
      x.transpose() * x / v + Eigen::MatrixXd::Identity(d, d) / prior_var;
  const Eigen::VectorXd ridge = a.ldlt().solve(x.transpose() * y / v);
  CHECK((post.mean[0] - ridge).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("monte carlo class probabilities") {
  // Symmetric outputs converge to 1/K.
  const PosteriorState s = init_posterior(2, 4, 1.0);
  Eigen::Vector2d phi(0.6, -0.2);
  const Eigen::VectorXd p = predict_proba(s, phi, 10000, 42);
  CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
  const double stderr_bound = 3.0 * 0.5 / std::sqrt(10000.0);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(p(k) - 0.25) <= stderr_bound);

  // Zero posterior variance reduces to the deterministic warp.
  PosteriorState z = init_posterior(2, 3, 1.0);
  for (int k = 0; k < 3; ++k) {
    z.cov[k].setZero();
    z.mean[k] = Eigen::Vector2d(0.1 * (k + 1), -0.3 * k);
  }
  const Eigen::VectorXd pz = predict_proba(z, phi, 16, 1);
  std::vector<double> logits(3);
  for (int k = 0; k < 3; ++k) logits[k] = phi.dot(z.mean[k]);
  const auto sm = softmax(logits);
  for (int k = 0; k < 3; ++k) CHECK(pz(k) == doctest::Approx(sm[k]).epsilon(1e-12));

  // Binary head: zero variance reduces to the sigmoid.
  PosteriorState b = init_posterior(2, 1, 1.0);
  b.cov[0].setZero();
  b.mean[0] = Eigen::Vector2d(1.0, 0.5);
  const Eigen::VectorXd pb = predict_proba(b, phi, 16, 1);
  REQUIRE(pb.size() == 1);  // single-logit head returns P(y = 1)
  CHECK(pb(0) == doctest::Approx(sigmoid(phi.dot(b.mean[0]))).epsilon(1e-12));
}

TEST_CASE("monte carlo estimate converges at the root-n rate") {
  Rng rng(12);
  const Instance inst = random_instance(40, 4, 3, rng);
  PosteriorState s = init_posterior(4, 3, 1.0);
  for (int i = 0; i < 40; ++i) s = update_one(s, inst.features.row(i).transpose(), inst.obs[i]);
  Eigen::VectorXd phi(4);
  for (int i = 0; i < 4; ++i) phi(i) = rng.normal();
  const Eigen::VectorXd coarse = predict_proba(s, phi, 1000, 77);
  const Eigen::VectorXd fine = predict_proba(s, phi, 100000, 78);
  // Bernoulli-bounded stderr at n=1000 dominates the error budget.
  const double bound = 5.0 * 0.5 / std::sqrt(1000.0);
  CHECK((coarse - fine).cwiseAbs().maxCoeff() <= bound);
}

TEST_CASE("assumed density filtering basics") {
  const PosteriorState s0 = init_posterior(2, 3, 1.0);
  Eigen::Vector2d phi(1.0, -0.5);

  // Vanishing damping leaves the state unchanged (up to the damping factor).
  const PosteriorState tiny = adf_update(s0, phi, 1, 512, 1e-12, 5);
  CHECK(max_state_diff(tiny, s0) <= 1e-9);

  // A zero feature vector carries no information about the weights.
  const PosteriorState flat = adf_update(s0, Eigen::Vector2d(0.0, 0.0), 1, 4096, 1.0, 5);
  CHECK(max_state_diff(flat, s0) <= 1e-6);

  CHECK_THROWS_AS(adf_update(s0, phi, 1, 50, 0.5, 5), std::invalid_argument);
  CHECK_THROWS_AS(adf_update(s0, phi, 1, 512, 0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(adf_update(s0, phi, 7, 512, 0.5, 5), std::invalid_argument);
}

TEST_CASE("1-D logistic ADF matches brute-force tilted moments") {
  // Oracle: dense grid over theta in [-10, 10] for N(0,1) * sigmoid(theta).
  const int g = 100000;
  double w_sum = 0.0, m_sum = 0.0, v_sum = 0.0;
  for (int i = 0; i < g; ++i) {
    const double th = -10.0 + 20.0 * (i + 0.5) / g;
    const double w = std::exp(-0.5 * th * th) * sigmoid(th);
    w_sum += w;
    m_sum += w * th;
    v_sum += w * th * th;
  }
  const double grid_mean = m_sum / w_sum;
  const double grid_var = v_sum / w_sum - grid_mean * grid_mean;

  Eigen::VectorXd phi(1);
  phi << 1.0;
  const PosteriorState s0 = init_posterior(1, 1, 1.0);
  std::vector<double> means, vars;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const PosteriorState s1 = adf_update(s0, phi, 1, 20000, 1.0, seed);
    means.push_back(s1.mean[0](0));
    vars.push_back(s1.cov[0](0, 0));
  }
  auto mean_stderr = [](const std::vector<double>& xs) {
    const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::pair<double, double>{m, std::sqrt(ss / (xs.size() - 1) / xs.size())};
  };
  const auto [m_hat, m_se] = mean_stderr(means);
  const auto [v_hat, v_se] = mean_stderr(vars);
  CHECK(std::abs(m_hat - grid_mean) <= 3.0 * m_se + 1e-6);
  CHECK(std::abs(v_hat - grid_var) <= 3.0 * v_se + 1e-6);
}

TEST_CASE("sgd with momentum") {
  Eigen::Vector2d phi(1.0, 1.0);

  SgdState frozen{Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Zero(3, 2)};
  sgd_step(frozen, phi, 1, 0.0, 0.9);
  CHECK(frozen.weights.isZero());

  SgdState s{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)};
  double prev = sgd_step(s, phi, 1, 0.05, 0.0);
  for (int i = 0; i < 20; ++i) {
    const double loss = sgd_step(s, phi, 1, 0.05, 0.0);
    CHECK(loss < prev);
    prev = loss;
  }

  // Linearly separable binary toy reaches perfect train accuracy.
  Rng rng(14);
  const int n = 100;
  Eigen::MatrixXd x(n, 2);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = i % 2;
    const double cx = y[i] == 0 ? -2.0 : 2.0;
    x(i, 0) = cx + 0.5 * rng.normal();
    x(i, 1) = cx + 0.5 * rng.normal();
  }
  Eigen::MatrixXd xs(5 * n, 2);
  std::vector<int> ys(5 * n);
  for (int r = 0; r < 5; ++r) {
    xs.middleRows(r * n, n) = x;
    std::copy(y.begin(), y.end(), ys.begin() + r * n);
  }
  const SgdFitResult fit = sgd_momentum_fit(
      SgdState{Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd::Zero(1, 2)}, xs, ys, 0.1, 0.9);
  CHECK_FALSE(fit.diverged);
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    const double logit = (fit.state.weights * x.row(i).transpose())(0);
    correct += (logit > 0.0 ? 1 : 0) == y[i];
  }
  CHECK(correct == n);
}

TEST_CASE("random relu feature maps are reconstructible") {
  const FeatureMap f1 = FeatureMap::random_relu(4, 16, 123);
  const FeatureMap f2 = FeatureMap::random_relu(4, 16, 123);
  CHECK((f1.weight - f2.weight).cwiseAbs().maxCoeff() == 0.0);
  CHECK((f1.bias - f2.bias).cwiseAbs().maxCoeff() == 0.0);
  CHECK(f1.output_dim == 16);

  Eigen::VectorXd x(4);
  x << 0.5, -1.0, 2.0, 0.0;
  const Eigen::VectorXd ph = f1.apply(x);
  CHECK(ph.size() == 16);
  CHECK(ph.minCoeff() >= 0.0);  // rectified

  const FeatureMap id = FeatureMap::identity(4);
  CHECK((id.apply(x) - x).cwiseAbs().maxCoeff() == 0.0);
}
