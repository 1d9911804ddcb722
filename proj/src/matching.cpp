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

#include "matching.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "special_fns.hpp"

namespace glik {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

TransformedDensity TransformedDensity::gamma_log(double alpha, double beta) {
  require_positive(alpha, "gamma_log: alpha");
  require_positive(beta, "gamma_log: beta");
  return {Family::GammaLog, alpha, beta};
}

TransformedDensity TransformedDensity::beta_logit(double alpha, double beta) {
  require_positive(alpha, "beta_logit: alpha");
  require_positive(beta, "beta_logit: beta");
  return {Family::BetaLogit, alpha, beta};
}

TransformedDensity TransformedDensity::exp_log(double lambda) {
  require_positive(lambda, "exp_log: lambda");
  return {Family::ExpLog, lambda, 0.0};
}

TransformedDensity TransformedDensity::inv_gamma_log(double alpha, double beta) {
  require_positive(alpha, "inv_gamma_log: alpha");
  require_positive(beta, "inv_gamma_log: beta");
  return {Family::InvGammaLog, alpha, beta};
}

TransformedDensity TransformedDensity::chi_sq_log(double k) {
  require_positive(k, "chi_sq_log: k");
  return {Family::ChiSqLog, k, 0.0};
}

double TransformedDensity::log_pdf(double psi) const {
  switch (family) {
    case Family::GammaLog:
      return a * std::log(b) - log_gamma(a) + a * psi - b * std::exp(psi);
    case Family::BetaLogit: {
      const std::array<double, 2> ab{a, b};
      // ln phi(psi) = -softplus(-psi), ln(1 - phi(psi)) = -softplus(psi)
      return -log_multivariate_beta(ab) - a * softplus(-psi) - b * softplus(psi);
    }
    case Family::ExpLog:
      return std::log(a) + psi - a * std::exp(psi);
    case Family::InvGammaLog:
      return a * std::log(b) - log_gamma(a) - a * psi - b * std::exp(-psi);
    case Family::ChiSqLog: {
      const double h = 0.5 * a;
      return h * std::log(0.5) - log_gamma(h) + h * psi - 0.5 * std::exp(psi);
    }
  }
  return 0.0;
}

double TransformedDensity::log_pdf_d1(double psi) const {
  switch (family) {
    case Family::GammaLog:
      return a - b * std::exp(psi);
    case Family::BetaLogit:
      return a - (a + b) * sigmoid(psi);
    case Family::ExpLog:
      return 1.0 - a * std::exp(psi);
    case Family::InvGammaLog:
      return -a + b * std::exp(-psi);
    case Family::ChiSqLog:
      return 0.5 * a - 0.5 * std::exp(psi);
  }
  return 0.0;
}

double TransformedDensity::log_pdf_d2(double psi) const {
  switch (family) {
    case Family::GammaLog:
      return -b * std::exp(psi);
    case Family::BetaLogit: {
      const double s = sigmoid(psi);
      return -(a + b) * s * (1.0 - s);
    }
    case Family::ExpLog:
      return -a * std::exp(psi);
    case Family::InvGammaLog:
      return -b * std::exp(-psi);
    case Family::ChiSqLog:
      return -0.5 * std::exp(psi);
  }
  return 0.0;
}

const char* method_name(MatchMethod m) {
  switch (m) {
    case MatchMethod::Laplace: return "laplace";
    case MatchMethod::Variational: return "variational";
    case MatchMethod::Moment: return "moment";
    case MatchMethod::MomentOri: return "moment-ori";
  }
  return "?";
}

MatchMethod method_from_name(const std::string& name) {
  if (name == "laplace") return MatchMethod::Laplace;
  if (name == "variational") return MatchMethod::Variational;
  if (name == "moment") return MatchMethod::Moment;
  if (name == "moment-ori" || name == "moment_ori") return MatchMethod::MomentOri;
  throw std::invalid_argument("unknown match method: " + name);
}

GaussianApprox match(const TransformedDensity& d, MatchMethod m) {
  const double a = d.a;
  const double b = d.b;
  switch (d.family) {
    case Family::GammaLog:
      switch (m) {
        case MatchMethod::Laplace:
          return {std::log(a / b), 1.0 / a};
        case MatchMethod::Variational:
          return {std::log(a / b) - 0.5 / a, 1.0 / a};
        case MatchMethod::Moment:
          return {digamma(a) - std::log(b), trigamma(a)};
        case MatchMethod::MomentOri: {
          // Log-normal matched to the Gamma's moments in the original basis.
          const double s2 = std::log1p(1.0 / a);
          return {std::log(a / b) - 0.5 * s2, s2};
        }
      }
      break;
    case Family::BetaLogit:
      switch (m) {
        case MatchMethod::Laplace:
          return {std::log(a / b), (a + b) / (a * b)};
        case MatchMethod::Variational: {
          GaussianApprox init = match(d, MatchMethod::Laplace);
          return variational_numeric(d, init, 1e-8);
        }
        case MatchMethod::Moment:
          return {digamma(a) - digamma(b), trigamma(a) + trigamma(b)};
        case MatchMethod::MomentOri:
          throw std::invalid_argument("moment-ori is only defined for the Gamma/log family");
      }
      break;
    case Family::ExpLog:
      switch (m) {
        case MatchMethod::Laplace:
          return {-std::log(a), 1.0};
        case MatchMethod::Variational:
          return {-std::log(a) - 0.5, 1.0};
        case MatchMethod::Moment:
          return {-std::log(a) - std::numbers::egamma, std::numbers::pi * std::numbers::pi / 6.0};
        case MatchMethod::MomentOri:
          throw std::invalid_argument("moment-ori is only defined for the Gamma/log family");
      }
      break;
    case Family::InvGammaLog:
      switch (m) {
        case MatchMethod::Laplace:
          return {std::log(b / a), 1.0 / a};
        case MatchMethod::Variational:
          return {std::log(b / a) + 0.5 / a, 1.0 / a};
        case MatchMethod::Moment:
          return {std::log(b) - digamma(a), trigamma(a)};
        case MatchMethod::MomentOri:
          throw std::invalid_argument("moment-ori is only defined for the Gamma/log family");
      }
      break;
    case Family::ChiSqLog:
      switch (m) {
        case MatchMethod::Laplace:
          return {std::log(a), 2.0 / a};
        case MatchMethod::Variational:
          return {std::log(a) - 1.0 / a, 2.0 / a};
        case MatchMethod::Moment:
          return {digamma(0.5 * a) + std::log(2.0), trigamma(0.5 * a)};
        case MatchMethod::MomentOri:
          throw std::invalid_argument("moment-ori is only defined for the Gamma/log family");
      }
      break;
  }
  throw std::logic_error("match: unreachable");
}

namespace {

constexpr int kQuadNodes = 64;

struct KlObjective {
  const TransformedDensity& d;
  std::vector<double> t, w;  // standard Gauss-Hermite rule

  explicit KlObjective(const TransformedDensity& density) : d(density) {
    gauss_hermite_standard(kQuadNodes, t, w);
  }

  // F(mu, s) = -0.5 s - E_q[ln p] (entropy constant dropped), s = ln sigma^2.
  double value(double mu, double s) const {
    const double sd = std::exp(0.5 * s);
    double e = 0.0;
    for (int i = 0; i < kQuadNodes; ++i) {
      e += w[i] * d.log_pdf(mu + std::numbers::sqrt2 * sd * t[i]);
    }
    e /= std::sqrt(std::numbers::pi);
    return -0.5 * s - e;
  }

  // dF/dmu = -E_q[d1], dF/ds = -0.5 - (sd/2) E_q[z d1] with z the standard
  // normal coordinate.
  void gradient(double mu, double s, double* gmu, double* gs) const {
    const double sd = std::exp(0.5 * s);
    double e1 = 0.0, ez = 0.0;
    for (int i = 0; i < kQuadNodes; ++i) {
      const double z = std::numbers::sqrt2 * t[i];
      const double d1 = d.log_pdf_d1(mu + sd * z);
      e1 += w[i] * d1;
      ez += w[i] * z * d1;
    }
    const double norm = std::sqrt(std::numbers::pi);
    e1 /= norm;
    ez /= norm;
    *gmu = -e1;
    *gs = -0.5 - 0.5 * sd * ez;
  }
};

}  // namespace

GaussianApprox variational_numeric(const TransformedDensity& d, GaussianApprox init,
                                   double tol) {
  if (!(tol > 0.0) || tol > 1e-2) {
    throw std::invalid_argument("variational_numeric: tol must be in (0, 1e-2]");
  }
  if (!std::isfinite(init.mean) || !(init.variance > 0.0)) {
    throw std::invalid_argument("variational_numeric: invalid init");
  }
  KlObjective obj(d);
  double x0 = init.mean;
  double x1 = std::log(init.variance);
  double f = obj.value(x0, x1);
  double g0, g1;
  obj.gradient(x0, x1, &g0, &g1);

  // BFGS on two parameters with backtracking line search.
  double h00 = 1.0, h01 = 0.0, h11 = 1.0;  // inverse Hessian estimate
  const int max_iter = 500;
  for (int it = 0; it < max_iter; ++it) {
    if (std::hypot(g0, g1) <= tol) {
      return {x0, std::exp(x1)};
    }
    double p0 = -(h00 * g0 + h01 * g1);
    double p1 = -(h01 * g0 + h11 * g1);
    double slope = p0 * g0 + p1 * g1;
    if (!(slope < 0.0)) {  // reset on a non-descent direction
      h00 = 1.0; h01 = 0.0; h11 = 1.0;
      p0 = -g0; p1 = -g1;
      slope = -(g0 * g0 + g1 * g1);
    }
    // Trust-region cap: near the support boundary the gradient can be huge and
    // an unscaled step would overshoot onto a flat plateau.
    const double pnorm = std::hypot(p0, p1);
    if (pnorm > 2.0) {
      const double scale = 2.0 / pnorm;
      p0 *= scale;
      p1 *= scale;
      slope *= scale;
    }
    double step = 1.0;
    double fn = f, n0 = x0, n1 = x1;
    bool ok = false;
    for (int ls = 0; ls < 60; ++ls) {
      n0 = x0 + step * p0;
      n1 = x1 + step * p1;
      fn = obj.value(n0, n1);
      if (std::isfinite(fn) && fn <= f + 1e-4 * step * slope) {
        ok = true;
        break;
      }
      step *= 0.5;
    }
    if (!ok) {
      break;
    }
    double ng0, ng1;
    obj.gradient(n0, n1, &ng0, &ng1);
    const double s0 = n0 - x0, s1 = n1 - x1;
    const double y0 = ng0 - g0, y1 = ng1 - g1;
    const double sy = s0 * y0 + s1 * y1;
    if (sy > 1e-14) {
      // BFGS inverse update: H <- (I - s y^T / sy) H (I - y s^T / sy) + s s^T / sy
      const double hy0 = h00 * y0 + h01 * y1;
      const double hy1 = h01 * y0 + h11 * y1;
      const double yhy = y0 * hy0 + y1 * hy1;
      const double c = (1.0 + yhy / sy) / sy;
      h00 += c * s0 * s0 - (hy0 * s0 + s0 * hy0) / sy;
      h01 += c * s0 * s1 - (hy0 * s1 + s0 * hy1) / sy;
      h11 += c * s1 * s1 - (hy1 * s1 + s1 * hy1) / sy;
    }
    x0 = n0; x1 = n1; f = fn; g0 = ng0; g1 = ng1;
  }

  // Newton polish on the stationarity system: BFGS can stall within a few
  // digits of the optimum once objective differences fall below rounding.
  for (int it = 0; it < 25 && std::hypot(g0, g1) > tol; ++it) {
    const double h = 1e-6;
    double ga0, ga1, gb0, gb1, gc0, gc1, gd0, gd1;
    obj.gradient(x0 + h, x1, &ga0, &ga1);
    obj.gradient(x0 - h, x1, &gb0, &gb1);
    obj.gradient(x0, x1 + h, &gc0, &gc1);
    obj.gradient(x0, x1 - h, &gd0, &gd1);
    const double j00 = (ga0 - gb0) / (2 * h), j01 = (gc0 - gd0) / (2 * h);
    const double j10 = (ga1 - gb1) / (2 * h), j11 = (gc1 - gd1) / (2 * h);
    const double det = j00 * j11 - j01 * j10;
    if (!(std::abs(det) > 1e-14)) break;
    double d0 = (j11 * g0 - j01 * g1) / det;
    double d1 = (j00 * g1 - j10 * g0) / det;
    const double gn = std::hypot(g0, g1);
    double step = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls) {
      double t0 = x0 - step * d0, t1 = x1 - step * d1;
      double tg0, tg1;
      obj.gradient(t0, t1, &tg0, &tg1);
      if (std::isfinite(tg0) && std::isfinite(tg1) && std::hypot(tg0, tg1) < gn) {
        x0 = t0; x1 = t1; g0 = tg0; g1 = tg1;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }

  if (std::hypot(g0, g1) <= tol) {
    return {x0, std::exp(x1)};
  }
  throw convergence_error("variational_numeric: gradient tolerance not reached",
                          {x0, std::exp(x1)});
}

namespace {

// Mode of the transformed log-density by bisection on the monotone first
// derivative (all five families are strictly log-concave).
double find_mode(const TransformedDensity& d) {
  double lo = 0.0, hi = 0.0;
  double step = 1.0;
  while (d.log_pdf_d1(lo) < 0.0) {
    lo -= step;
    step *= 2.0;
    if (lo < -745.0) break;
  }
  step = 1.0;
  while (d.log_pdf_d1(hi) > 0.0) {
    hi += step;
    step *= 2.0;
    if (hi > 745.0) break;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (d.log_pdf_d1(mid) > 0.0) lo = mid; else hi = mid;
    if (hi - lo < 1e-13 * (1.0 + std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

struct Integrand {
  double lo = 0.0, hi = 0.0;
};

// Interval containing essentially all mass: expand from the mode until the
// log-density has dropped 80 nats below the peak.
Integrand mass_interval(const TransformedDensity& d, double mode) {
  const double peak = d.log_pdf(mode);
  Integrand iv;
  double step = 1.0;
  iv.lo = mode - 1.0;
  while (d.log_pdf(iv.lo) > peak - 80.0) {
    step *= 2.0;
    iv.lo -= step;
  }
  step = 1.0;
  iv.hi = mode + 1.0;
  while (d.log_pdf(iv.hi) > peak - 80.0) {
    step *= 2.0;
    iv.hi += step;
  }
  return iv;
}

}  // namespace

GaussianApprox numeric_moments(const TransformedDensity& d) {
  const double mode = find_mode(d);
  const auto iv = mass_interval(d, mode);

  // Trapezoid with interval doubling until mean/variance stabilize.
  double prev_mean = 0.0, prev_var = 0.0;
  bool have_prev = false;
  for (int n = 1 << 11; n <= (1 << 19); n <<= 1) {
    const double h = (iv.hi - iv.lo) / n;
    double z = 0.0, m1 = 0.0, m2 = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double psi = iv.lo + h * i;
      double p = std::exp(d.log_pdf(psi));
      if (!std::isfinite(p)) {
        throw std::runtime_error("numeric_moments: non-finite integrand");
      }
      if (i == 0 || i == n) p *= 0.5;
      z += p;
      m1 += p * psi;
      m2 += p * psi * psi;
    }
    z *= h; m1 *= h; m2 *= h;
    if (!(z > 0.0) || !std::isfinite(z)) {
      throw std::runtime_error("numeric_moments: integration failure");
    }
    const double mean = m1 / z;
    const double var = m2 / z - mean * mean;
    if (have_prev && std::abs(mean - prev_mean) < 1e-9 &&
        std::abs(var - prev_var) < 1e-9) {
      return {mean, var};
    }
    prev_mean = mean;
    prev_var = var;
    have_prev = true;
  }
  return {prev_mean, prev_var};
}

GaussianApprox numeric_mode_hessian(const TransformedDensity& d) {
  // Bisection localizes the mode; Newton on the first derivative polishes it.
  double psi = find_mode(d);
  for (int it = 0; it < 100; ++it) {
    const double d1 = d.log_pdf_d1(psi);
    const double d2 = d.log_pdf_d2(psi);
    if (!(d2 < 0.0) || !std::isfinite(d1)) break;
    const double next = psi - d1 / d2;
    if (!std::isfinite(next) || std::abs(next - psi) > 1.0) break;
    if (std::abs(next - psi) < 1e-14 * (1.0 + std::abs(psi))) {
      psi = next;
      break;
    }
    psi = next;
  }
  const double d2 = d.log_pdf_d2(psi);
  if (!(d2 < 0.0)) {
    throw std::runtime_error("numeric_mode_hessian: non-concave at mode");
  }
  return {psi, -1.0 / d2};
}

double kl_q_to_p(const GaussianApprox& q, const TransformedDensity& d) {
  std::vector<double> t, w;
  gauss_hermite_standard(kQuadNodes, t, w);
  const double sd = std::sqrt(q.variance);
  double e = 0.0;
  for (int i = 0; i < kQuadNodes; ++i) {
    e += w[i] * d.log_pdf(q.mean + std::numbers::sqrt2 * sd * t[i]);
  }
  e /= std::sqrt(std::numbers::pi);
  const double entropy = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * q.variance);
  return -entropy - e;
}

}  // namespace glik
