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

#ifndef GLIK_MATCHING_HPP
#define GLIK_MATCHING_HPP

#include <stdexcept>
#include <string>

namespace glik {

// Univariate Gaussian in the transformed basis.
struct GaussianApprox {
  double mean = 0.0;
  double variance = 1.0;
};

enum class Family { GammaLog, BetaLogit, ExpLog, InvGammaLog, ChiSqLog };

// A base density pushed through its support-removing transform (log or logit),
// with evaluable log-density and analytic first/second derivatives.
struct TransformedDensity {
  Family family = Family::GammaLog;
  double a = 1.0;  // alpha / lambda / k
  double b = 1.0;  // beta (unused for ExpLog, ChiSqLog)

  static TransformedDensity gamma_log(double alpha, double beta);
  static TransformedDensity beta_logit(double alpha, double beta);
  static TransformedDensity exp_log(double lambda);
  static TransformedDensity inv_gamma_log(double alpha, double beta);
  static TransformedDensity chi_sq_log(double k);

  double log_pdf(double psi) const;
  double log_pdf_d1(double psi) const;
  double log_pdf_d2(double psi) const;
};

enum class MatchMethod { Laplace, Variational, Moment, MomentOri };

const char* method_name(MatchMethod m);
// Throws std::invalid_argument on unknown names.
MatchMethod method_from_name(const std::string& name);

// Closed-form matcher dispatch. MomentOri is only defined for GammaLog;
// BetaLogit + Variational falls through to variational_numeric.
GaussianApprox match(const TransformedDensity& d, MatchMethod m);

// Thrown by variational_numeric when the gradient tolerance is not reached;
// carries the last iterate.
struct convergence_error : std::runtime_error {
  GaussianApprox last;
  convergence_error(const std::string& what, GaussianApprox iterate)
      : std::runtime_error(what), last(iterate) {}
};

// Minimizes KL(q || p_psi) over (mu, log sigma^2) with a 64-node Gauss-Hermite
// objective and BFGS; returns the point where the gradient norm is <= tol.
GaussianApprox variational_numeric(const TransformedDensity& d, GaussianApprox init,
                                   double tol = 1e-8);

// Oracles: independent numeric routes used to validate the closed forms.
GaussianApprox numeric_moments(const TransformedDensity& d);
GaussianApprox numeric_mode_hessian(const TransformedDensity& d);

// E_q[ln q - ln p_psi] via 64-node Gauss-Hermite centered at q.
double kl_q_to_p(const GaussianApprox& q, const TransformedDensity& d);

}  // namespace glik

#endif
