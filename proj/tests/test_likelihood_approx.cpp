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

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dataset.hpp"
#include "doctest.h"
#include "likelihood_approx.hpp"
#include "special_fns.hpp"

using namespace glik;

TEST_CASE("softmax pseudo-observations, laplace") {
  ApproxConfig cfg;
  cfg.method = MatchMethod::Laplace;
  cfg.alpha_eps = 0.1;
  const ClassPseudoObs obs = softmax_pseudo_obs(0, 3, cfg);
  REQUIRE(obs.means.size() == 3);
  CHECK(obs.means[0] == doctest::Approx(0.0953102).epsilon(1e-6));
  CHECK(obs.variances[0] == doctest::Approx(0.9090909).epsilon(1e-6));
  for (int k : {1, 2}) {
    CHECK(obs.means[k] == doctest::Approx(-2.3025851).epsilon(1e-6));
    CHECK(obs.variances[k] == doctest::Approx(10.0).epsilon(1e-6));
  }
}

TEST_CASE("softmax pseudo-observations, moment") {
  ApproxConfig cfg;
  cfg.method = MatchMethod::Moment;
  cfg.alpha_eps = 0.1;
  const ClassPseudoObs obs = softmax_pseudo_obs(0, 3, cfg);
  CHECK(obs.means[0] == doctest::Approx(digamma(1.1)).epsilon(1e-12));
  CHECK(obs.variances[0] == doctest::Approx(trigamma(1.1)).epsilon(1e-12));
  CHECK(obs.means[1] == doctest::Approx(digamma(0.1)).epsilon(1e-12));
}

TEST_CASE("softmax pseudo-observations, moment-ori") {
  ApproxConfig cfg;
  cfg.method = MatchMethod::MomentOri;
  cfg.alpha_eps = 0.01;
  for (int y : {0, 1, 3}) {
    const ClassPseudoObs obs = softmax_pseudo_obs(y, 4, cfg);
    CHECK(obs.variances[y] == doctest::Approx(0.6881843912).epsilon(1e-8));
  }
}

TEST_CASE("softmax pseudo-observation domain checks") {
  ApproxConfig cfg;
  CHECK_THROWS_AS(softmax_pseudo_obs(-1, 3, cfg), std::invalid_argument);
  CHECK_THROWS_AS(softmax_pseudo_obs(3, 3, cfg), std::invalid_argument);
  CHECK_THROWS_AS(softmax_pseudo_obs(0, 1, cfg), std::invalid_argument);
}

TEST_CASE("observed class mean dominates") {
  for (MatchMethod m : {MatchMethod::Laplace, MatchMethod::Variational, MatchMethod::Moment,
                        MatchMethod::MomentOri}) {
    for (double ae : {0.001, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0}) {
      ApproxConfig cfg;
      cfg.method = m;
      cfg.alpha_eps = ae;
      const ClassPseudoObs obs = softmax_pseudo_obs(1, 4, cfg);
      for (int k = 0; k < 4; ++k) {
        if (k != 1) CHECK(obs.means[1] > obs.means[k]);
      }
    }
  }
}

TEST_CASE("logistic pseudo-observations") {
  ApproxConfig cfg;
  cfg.method = MatchMethod::Laplace;
  cfg.alpha_eps = cfg.beta_eps = 1.0;
  const BinaryPseudoObs pos = logistic_pseudo_obs(1, cfg);
  CHECK(pos.mean == doctest::Approx(std::numbers::ln2).epsilon(1e-9));
  CHECK(pos.variance == doctest::Approx(1.5).epsilon(1e-9));

  cfg.method = MatchMethod::Moment;
  const BinaryPseudoObs mom = logistic_pseudo_obs(1, cfg);
  CHECK(mom.mean == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mom.variance == doctest::Approx(2.2898681).epsilon(1e-6));

  CHECK_THROWS_AS(logistic_pseudo_obs(2, cfg), std::invalid_argument);
}

TEST_CASE("logistic label-flip antisymmetry") {
  for (MatchMethod m :
       {MatchMethod::Laplace, MatchMethod::Variational, MatchMethod::Moment}) {
    for (double ae : {0.1, 0.5, 1.0}) {
      ApproxConfig cfg;
      cfg.method = m;
      cfg.alpha_eps = cfg.beta_eps = ae;
      const BinaryPseudoObs p1 = logistic_pseudo_obs(1, cfg);
      const BinaryPseudoObs p0 = logistic_pseudo_obs(0, cfg);
      CHECK(p1.mean == doctest::Approx(-p0.mean).epsilon(1e-8));
      CHECK(p1.variance == doctest::Approx(p0.variance).epsilon(1e-8));
    }
  }
}

TEST_CASE("gaussian pseudo log-likelihood") {
  {
    ClassPseudoObs obs;
    obs.means = {0.7};
    obs.variances = {1.0};
    const std::vector<double> logits{0.7};
    CHECK(approx_log_lik(logits, obs) == doctest::Approx(-0.9189385332).epsilon(1e-9));
  }
  {
    ClassPseudoObs obs;
    obs.means = {1.0, -1.0, 0.0, 2.0};
    obs.variances = {1.0, 1.0, 1.0, 1.0};
    std::vector<double> logits(4);
    for (int k = 0; k < 4; ++k) logits[k] = obs.means[k] + 1.0;
    CHECK(approx_log_lik(logits, obs) == doctest::Approx(-5.6757541).epsilon(1e-6));

    const double at_means = approx_log_lik(obs.means, obs);
    ClassPseudoObs wide = obs;
    for (double& v : wide.variances) v *= 4.0;
    CHECK(approx_log_lik(obs.means, wide) - at_means ==
          doctest::Approx(-0.5 * 4.0 * std::log(4.0)).epsilon(1e-9));

    // Quadratic maximum at logits = means.
    std::vector<double> perturbed = obs.means;
    perturbed[2] += 0.3;
    CHECK(at_means > approx_log_lik(perturbed, obs));

    const std::vector<double> wrong_dim{0.0, 0.0};
    CHECK_THROWS_AS(approx_log_lik(wrong_dim, obs), std::invalid_argument);
  }
}

TEST_CASE("alpha_eps selection follows train log-likelihood") {
  Dataset train;
  train.features = Eigen::MatrixXd::Zero(2, 1);
  train.labels = {0, 1};
  train.num_classes = 2;

  // Fake trainer: higher train likelihood at the larger alpha_eps.
  PseudoTrainer trainer = [](const Dataset& d, const ApproxConfig& cfg) {
    const double p = cfg.alpha_eps > 0.05 ? 0.9 : 0.6;
    std::vector<std::vector<double>> probs;
    for (int i = 0; i < d.size(); ++i) {
      std::vector<double> row(2, 1.0 - p);
      row[d.labels[i]] = p;
      probs.push_back(row);
    }
    return probs;
  };
  const std::vector<double> grid{0.01, 0.1};
  const ApproxConfig sel = select_alpha_eps(train, grid, MatchMethod::Laplace, trainer);
  CHECK(sel.alpha_eps == 0.1);

  const std::vector<double> single{0.05};
  CHECK(select_alpha_eps(train, single, MatchMethod::Laplace, trainer).alpha_eps == 0.05);

  // Ties break toward the smaller candidate.
  PseudoTrainer flat = [](const Dataset& d, const ApproxConfig&) {
    return std::vector<std::vector<double>>(d.size(), std::vector<double>{0.5, 0.5});
  };
  const std::vector<double> grid2{0.2, 0.01, 0.1};
  CHECK(select_alpha_eps(train, grid2, MatchMethod::Laplace, flat).alpha_eps == 0.01);
}
