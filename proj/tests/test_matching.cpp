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

#include "doctest.h"
#include "matching.hpp"
#include "rng.hpp"
#include "special_fns.hpp"

using namespace glik;

namespace {

std::vector<TransformedDensity> sample_densities(Rng& rng) {
  auto draw = [&] { return std::exp(std::log(0.1) + std::log(500.0) * rng.uniform()); };
  return {
      TransformedDensity::gamma_log(draw(), draw()),
      TransformedDensity::beta_logit(draw(), draw()),
      TransformedDensity::exp_log(draw()),
      TransformedDensity::inv_gamma_log(draw(), draw()),
      TransformedDensity::chi_sq_log(draw()),
  };
}

}  // namespace

TEST_CASE("log_pdf closed forms") {
  CHECK(TransformedDensity::gamma_log(1, 1).log_pdf(0.0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(TransformedDensity::beta_logit(1, 1).log_pdf(0.0) ==
        doctest::Approx(std::log(0.25)).epsilon(1e-12));
  CHECK(TransformedDensity::exp_log(2).log_pdf(0.0) ==
        doctest::Approx(std::log(2.0) - 2.0).epsilon(1e-12));
}

TEST_CASE("each transformed density integrates to one") {
  const QuadratureRule t = make_quadrature(QuadKind::Trapezoid, 20001, 0.0, 40.0);
  const std::vector<TransformedDensity> ds = {
      TransformedDensity::gamma_log(2, 3),   TransformedDensity::beta_logit(2, 5),
      TransformedDensity::exp_log(1),        TransformedDensity::inv_gamma_log(3, 2),
      TransformedDensity::chi_sq_log(4),     TransformedDensity::gamma_log(0.5, 1),
      TransformedDensity::beta_logit(0.5, 0.5),
  };
  for (const auto& d : ds) {
    const double mass = t.expectation([&](double psi) { return std::exp(d.log_pdf(psi)); });
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("log_pdf derivatives match finite differences") {
  Rng rng(5);
  const double h = 1e-6;
  for (int t = 0; t < 20; ++t) {
    for (const auto& d : sample_densities(rng)) {
      const double psi = 4.0 * (rng.uniform() - 0.5);
      const double fd1 = (d.log_pdf(psi + h) - d.log_pdf(psi - h)) / (2.0 * h);
      const double fd2 =
          (d.log_pdf(psi + h) - 2.0 * d.log_pdf(psi) + d.log_pdf(psi - h)) / (h * h);
      CHECK(std::abs(d.log_pdf_d1(psi) - fd1) <= 1e-4 * (1.0 + std::abs(fd1)));
      CHECK(std::abs(d.log_pdf_d2(psi) - fd2) <= 1e-2 * (1.0 + std::abs(fd2)));
    }
  }
}

TEST_CASE("closed-form matcher examples") {
  auto check = [](GaussianApprox g, double mean, double var) {
    CHECK(g.mean == doctest::Approx(mean).epsilon(1e-9));
    CHECK(g.variance == doctest::Approx(var).epsilon(1e-9));
  };
  check(match(TransformedDensity::gamma_log(2, 3), MatchMethod::Laplace), -0.4054651081, 0.5);
  check(match(TransformedDensity::gamma_log(2, 3), MatchMethod::Moment), -0.6758279536,
        0.6449340668);
  check(match(TransformedDensity::gamma_log(2, 3), MatchMethod::MomentOri), -0.6081976622,
        0.4054651081);
  check(match(TransformedDensity::beta_logit(2, 2), MatchMethod::Laplace), 0.0, 1.0);
  check(match(TransformedDensity::beta_logit(1, 1), MatchMethod::Moment), 0.0,
        std::numbers::pi * std::numbers::pi / 3.0);
  check(match(TransformedDensity::exp_log(1), MatchMethod::Moment), -0.5772156649, 1.6449340668);
  check(match(TransformedDensity::chi_sq_log(4), MatchMethod::Laplace), std::log(4.0), 0.5);
  check(match(TransformedDensity::inv_gamma_log(2, 3), MatchMethod::Variational), 0.6554651081,
        0.5);
}

TEST_CASE("moment-ori is restricted to the gamma/log family") {
  CHECK_THROWS_AS(match(TransformedDensity::beta_logit(2, 2), MatchMethod::MomentOri),
                  std::invalid_argument);
  CHECK_THROWS_AS(match(TransformedDensity::exp_log(1), MatchMethod::MomentOri),
                  std::invalid_argument);
  CHECK_THROWS_AS(match(TransformedDensity::inv_gamma_log(2, 2), MatchMethod::MomentOri),
                  std::invalid_argument);
}

TEST_CASE("method name round trip") {
  for (MatchMethod m : {MatchMethod::Laplace, MatchMethod::Variational, MatchMethod::Moment,
                        MatchMethod::MomentOri}) {
    CHECK(method_from_name(method_name(m)) == m);
  }
  CHECK_THROWS_AS(method_from_name("fancy"), std::invalid_argument);
}

TEST_CASE("variational_numeric examples") {
  for (double ab : {0.7, 2.0, 6.0}) {
    const auto d = TransformedDensity::beta_logit(ab, ab);
    const GaussianApprox q = variational_numeric(d, match(d, MatchMethod::Laplace));
    CHECK(std::abs(q.mean) <= 1e-6);
  }

  const auto g = TransformedDensity::gamma_log(5, 2);
  const GaussianApprox closed = match(g, MatchMethod::Variational);
  const GaussianApprox numeric = variational_numeric(g, match(g, MatchMethod::Laplace));
  CHECK(std::abs(closed.mean - numeric.mean) <= 1e-4);
  CHECK(std::abs(closed.variance - numeric.variance) <= 1e-4);
}

TEST_CASE("beta/logit variational matches a dense grid search") {
  // Independent oracle: argmin of KL(q || p) over a 401 x 401 grid covering
  // mu in [-2, 2] x ln sigma^2 in [-3, 2], refined by a local parabolic fit
  // around the best cell in each coordinate.
  const auto d = TransformedDensity::beta_logit(2, 2);
  const int n = 401;
  double best = std::numeric_limits<double>::infinity();
  int bi = 0, bj = 0;
  auto mu_at = [&](int i) { return -2.0 + 4.0 * i / (n - 1); };
  auto ls_at = [&](int j) { return -3.0 + 5.0 * j / (n - 1); };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = kl_q_to_p({mu_at(i), std::exp(ls_at(j))}, d);
      if (v < best) {
        best = v;
        bi = i;
        bj = j;
      }
    }
  }
  REQUIRE(bi > 0);
  REQUIRE(bi < n - 1);
  REQUIRE(bj > 0);
  REQUIRE(bj < n - 1);
  auto parabola_min = [](double xm, double x0, double xp, double fm, double f0, double fp) {
    const double denom = fm - 2.0 * f0 + fp;
    if (std::abs(denom) < 1e-300) return x0;
    return x0 + 0.5 * (x0 - xm) * (fm - fp) / denom;
  };
  const double mu_star =
      parabola_min(mu_at(bi - 1), mu_at(bi), mu_at(bi + 1),
                   kl_q_to_p({mu_at(bi - 1), std::exp(ls_at(bj))}, d), best,
                   kl_q_to_p({mu_at(bi + 1), std::exp(ls_at(bj))}, d));
  const double ls_star =
      parabola_min(ls_at(bj - 1), ls_at(bj), ls_at(bj + 1),
                   kl_q_to_p({mu_at(bi), std::exp(ls_at(bj - 1))}, d), best,
                   kl_q_to_p({mu_at(bi), std::exp(ls_at(bj + 1))}, d));

  const GaussianApprox q = match(d, MatchMethod::Variational);
  CHECK(std::abs(q.mean - mu_star) <= 2e-3);
  CHECK(std::abs(q.variance - std::exp(ls_star)) <= 2e-3);
}

TEST_CASE("numeric moment oracle") {
  const auto g = TransformedDensity::gamma_log(3, 1);
  const GaussianApprox nm = numeric_moments(g);
  const GaussianApprox cm = match(g, MatchMethod::Moment);
  CHECK(std::abs(nm.mean - cm.mean) <= 1e-6);
  CHECK(std::abs(nm.variance - cm.variance) <= 1e-6);

  const auto b = TransformedDensity::beta_logit(2, 5);
  const GaussianApprox nb = numeric_moments(b);
  CHECK(std::abs(nb.mean - (digamma(2) - digamma(5))) <= 1e-6);
  CHECK(std::abs(nb.variance - (trigamma(2) + trigamma(5))) <= 1e-6);

  const GaussianApprox ne = numeric_moments(TransformedDensity::exp_log(1));
  CHECK(std::abs(ne.mean - (-0.5772157)) <= 1e-6);
  CHECK(std::abs(ne.variance - 1.6449341) <= 1e-6);
}

TEST_CASE("numeric mode/curvature oracle") {
  const auto g = TransformedDensity::gamma_log(2, 3);
  const GaussianApprox nh = numeric_mode_hessian(g);
  const GaussianApprox lp = match(g, MatchMethod::Laplace);
  CHECK(std::abs(nh.mean - lp.mean) <= 1e-8);
  CHECK(std::abs(nh.variance - lp.variance) <= 1e-8);

  const GaussianApprox nb = numeric_mode_hessian(TransformedDensity::beta_logit(3, 4));
  CHECK(std::abs(nb.mean - std::log(3.0 / 4.0)) <= 1e-8);
  CHECK(std::abs(nb.variance - 7.0 / 12.0) <= 1e-8);

  const GaussianApprox nc = numeric_mode_hessian(TransformedDensity::chi_sq_log(6));
  CHECK(std::abs(nc.mean - std::log(6.0)) <= 1e-8);
  CHECK(std::abs(nc.variance - 1.0 / 3.0) <= 1e-8);
}

TEST_CASE("kl_q_to_p behavior") {
  const auto g50 = TransformedDensity::gamma_log(50, 1);
  CHECK(kl_q_to_p(numeric_moments(g50), g50) < 0.01);

  const auto g = TransformedDensity::gamma_log(0.5, 1);
  CHECK(kl_q_to_p(match(g, MatchMethod::Variational), g) <
        kl_q_to_p(match(g, MatchMethod::Laplace), g));

  const GaussianApprox v = match(g, MatchMethod::Variational);
  CHECK(kl_q_to_p({v.mean + 0.1, v.variance}, g) > kl_q_to_p(v, g));

  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    for (const auto& d : sample_densities(rng)) {
      CHECK(kl_q_to_p(numeric_moments(d), d) >= -1e-9);
    }
  }
}

TEST_CASE("matchers agree with numeric oracles on random draws") {
  Rng rng(20260823);
  for (int t = 0; t < 50; ++t) {
    for (const auto& d : sample_densities(rng)) {
      const GaussianApprox mm = match(d, MatchMethod::Moment);
      const GaussianApprox nm = numeric_moments(d);
      CHECK(std::abs(mm.mean - nm.mean) <= 1e-6);
      CHECK(std::abs(mm.variance - nm.variance) <= 1e-6);

      const GaussianApprox lp = match(d, MatchMethod::Laplace);
      const GaussianApprox nh = numeric_mode_hessian(d);
      CHECK(std::abs(lp.mean - nh.mean) <= 1e-8);
      CHECK(std::abs(lp.variance - nh.variance) <= 1e-8);

      if (d.family != Family::BetaLogit) {
        const GaussianApprox vc = match(d, MatchMethod::Variational);
        const GaussianApprox vn = variational_numeric(d, lp);
        CHECK(std::abs(vc.mean - vn.mean) <= 1e-4);
        CHECK(std::abs(vc.variance - vn.variance) <= 1e-4);
      }
    }
  }
}

TEST_CASE("gamma variational/laplace relation") {
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const double a = std::exp(std::log(0.1) + std::log(500.0) * rng.uniform());
    const double b = std::exp(std::log(0.1) + std::log(500.0) * rng.uniform());
    const auto d = TransformedDensity::gamma_log(a, b);
    const GaussianApprox v = match(d, MatchMethod::Variational);
    const GaussianApprox l = match(d, MatchMethod::Laplace);
    CHECK(v.mean - l.mean == doctest::Approx(-0.5 / a).epsilon(1e-12));
    CHECK(v.variance == l.variance);
  }
}

TEST_CASE("chi-squared is the gamma special case") {
  for (double k : {1.0, 2.0, 5.0, 10.0}) {
    const auto c = TransformedDensity::chi_sq_log(k);
    const auto g = TransformedDensity::gamma_log(0.5 * k, 0.5);
    for (MatchMethod m : {MatchMethod::Laplace, MatchMethod::Variational, MatchMethod::Moment}) {
      const GaussianApprox qc = match(c, m);
      const GaussianApprox qg = match(g, m);
      CHECK(qc.mean == qg.mean);
      CHECK(qc.variance == qg.variance);
    }
  }
}

TEST_CASE("inverse-gamma mirrors gamma in the log basis") {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const double a = std::exp(std::log(0.1) + std::log(500.0) * rng.uniform());
    const double b = std::exp(std::log(0.1) + std::log(500.0) * rng.uniform());
    const GaussianApprox gi = match(TransformedDensity::inv_gamma_log(a, b), MatchMethod::Moment);
    const GaussianApprox gg = match(TransformedDensity::gamma_log(a, b), MatchMethod::Moment);
    CHECK(gi.mean == doctest::Approx(-gg.mean).epsilon(1e-12));
    CHECK(gi.variance == gg.variance);
  }
}

TEST_CASE("closed-form variational matches are stationary points of the KL") {
  Rng rng(13);
  const double h = 1e-5;
  for (int t = 0; t < 20; ++t) {
    for (const auto& d : sample_densities(rng)) {
      if (d.family == Family::BetaLogit) continue;
      const GaussianApprox q = match(d, MatchMethod::Variational);
      const double ls = std::log(q.variance);
      const double gm = (kl_q_to_p({q.mean + h, q.variance}, d) -
                         kl_q_to_p({q.mean - h, q.variance}, d)) /
                        (2.0 * h);
      const double gs = (kl_q_to_p({q.mean, std::exp(ls + h)}, d) -
                         kl_q_to_p({q.mean, std::exp(ls - h)}, d)) /
                        (2.0 * h);
      CHECK(std::sqrt(gm * gm + gs * gs) <= 1e-4);
    }
  }
}
