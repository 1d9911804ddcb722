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

#include "special_fns.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace glik {

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("log_gamma: x must be positive and finite");
  }
  return std::lgamma(x);
}

namespace {

// Asymptotic tail of Psi, valid for large x (Bernoulli terms through x^-12).
double digamma_asymptotic(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = inv2 * (1.0 / 12.0 +
                  inv2 * (-1.0 / 120.0 +
                  inv2 * (1.0 / 252.0 +
                  inv2 * (-1.0 / 240.0 +
                  inv2 * (1.0 / 132.0 +
                  inv2 * (-691.0 / 32760.0))))));
  return std::log(x) - 0.5 * inv - series;
}

double trigamma_asymptotic(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = inv * (1.0 +
                  inv * (0.5 +
                  inv * (1.0 / 6.0 +
                  inv2 * (-1.0 / 30.0 +
                  inv2 * (1.0 / 42.0 +
                  inv2 * (-1.0 / 30.0 +
                  inv2 * (5.0 / 66.0 +
                  inv2 * (-691.0 / 2730.0))))))));
  return series;
}

}  // namespace

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("digamma: x must be positive and finite");
  }
  // Recurrence shift to x >= 6, then the asymptotic series.
  double shift = 0.0;
  while (x < 6.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  return shift + digamma_asymptotic(x);
}

double trigamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("trigamma: x must be positive and finite");
  }
  double shift = 0.0;
  while (x < 6.0) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  return shift + trigamma_asymptotic(x);
}

double log_multivariate_beta(std::span<const double> alpha) {
  if (alpha.size() < 2) {
    throw std::invalid_argument("log_multivariate_beta: need at least 2 entries");
  }
  double sum = 0.0;
  double lg = 0.0;
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument("log_multivariate_beta: entries must be positive");
    }
    sum += a;
    lg += log_gamma(a);
  }
  return lg - log_gamma(sum);
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) {
    throw std::invalid_argument("log_sum_exp: empty input");
  }
  double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<double> softmax(std::span<const double> v) {
  if (v.empty()) {
    throw std::invalid_argument("softmax: empty input");
  }
  double lse = log_sum_exp(v);
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = std::exp(v[i] - lse);
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

namespace {

// Gauss-Hermite via Newton refinement on the orthonormal recurrence
// (initial guesses as in the classic gauher routine).
void compute_gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const double pi_m4 = 0.751125544464942;  // pi^{-1/4}
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pi_m4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(j / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  // Descending order from the loop; sort ascending for a tidy rule.
  std::reverse(x.begin(), x.end());
  std::reverse(w.begin(), w.end());
}

std::map<int, std::pair<std::vector<double>, std::vector<double>>> gh_cache;
std::mutex gh_mutex;

}  // namespace

void gauss_hermite_standard(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  std::lock_guard<std::mutex> lock(gh_mutex);
  auto it = gh_cache.find(n);
  if (it == gh_cache.end()) {
    std::vector<double> x, w;
    compute_gauss_hermite(n, x, w);
    it = gh_cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first;
  }
  nodes = it->second.first;
  weights = it->second.second;
}

QuadratureRule make_quadrature(QuadKind kind, int n, double center, double scale) {
  if (n < 2 || !(scale > 0.0) || !std::isfinite(center) || !std::isfinite(scale)) {
    throw std::invalid_argument("make_quadrature: need n >= 2 and scale > 0");
  }
  QuadratureRule rule;
  rule.kind = kind;
  if (kind == QuadKind::GaussHermite) {
    std::vector<double> t, w;
    gauss_hermite_standard(n, t, w);
    rule.nodes.resize(n);
    rule.weights = w;
    const double s = std::numbers::sqrt2 * scale;
    for (int i = 0; i < n; ++i) rule.nodes[i] = center + s * t[i];
  } else {
    rule.nodes.resize(n);
    rule.weights.assign(n, 0.0);
    const double lo = center - scale;
    const double h = 2.0 * scale / (n - 1);
    for (int i = 0; i < n; ++i) {
      rule.nodes[i] = lo + h * i;
      rule.weights[i] = (i == 0 || i == n - 1) ? 0.5 * h : h;
    }
  }
  return rule;
}

double QuadratureRule::expectation(const std::function<double(double)>& f) const {
  double acc = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
  if (kind == QuadKind::GaussHermite) acc /= std::sqrt(std::numbers::pi);
  return acc;
}

}  // namespace glik
