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

#ifndef GLIK_SPECIAL_FNS_HPP
#define GLIK_SPECIAL_FNS_HPP

#include <functional>
#include <span>
#include <vector>

namespace glik {

// ln Gamma(x), x > 0.
double log_gamma(double x);

// Psi(x) = d/dx ln Gamma(x), x > 0.
double digamma(double x);

// Psi'(x), x > 0.
double trigamma(double x);

// ln B(alpha) = sum_k ln Gamma(alpha_k) - ln Gamma(sum_k alpha_k), len >= 2.
double log_multivariate_beta(std::span<const double> alpha);

double log_sum_exp(std::span<const double> v);
std::vector<double> softmax(std::span<const double> v);
double sigmoid(double x);

// log(1 + e^x) without overflow.
double softplus(double x);

enum class QuadKind { GaussHermite, Trapezoid };

// GaussHermite: nodes affinely mapped for expectations under N(center, scale^2);
// stored weights are the raw physicists' weights (sum = sqrt(pi)).
// Trapezoid: uniform grid on [center - scale, center + scale] with plain
// integration weights.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  QuadKind kind = QuadKind::GaussHermite;

  // E[f(psi)] under N(center, scale^2) for GaussHermite rules;
  // plain integral of f for Trapezoid rules.
  double expectation(const std::function<double(double)>& f) const;
};

QuadratureRule make_quadrature(QuadKind kind, int n, double center, double scale);

// Standard Gauss-Hermite nodes/weights for weight e^{-x^2}, cached per n.
void gauss_hermite_standard(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace glik

#endif
