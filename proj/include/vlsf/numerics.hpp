#pragma once

// Special-function kernels: gamma and non-central chi-squared densities and
// distribution functions, the Gaussian tail and its inverse, and log-domain
// helpers. Everything here is a pure function of its arguments.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vlsf {

/// Raised when an iterative numerical routine fails to meet its tolerance.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct GammaParams {
  double shape;
  double scale;
};

struct NoncentralChi2Params {
  int dof;
  double noncentrality;
};

// ln(e^a + e^b), exact when either side is -inf.
inline double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// ln(1 - e^a) for a <= 0.
inline double log1m_exp(double a) {
  if (a > -0.6931471805599453) return std::log(-std::expm1(a));
  return std::log1p(-std::exp(a));
}

double log_gamma_fn(double x);

/// ln of the regularized lower incomplete gamma P(a, y); stays finite deep
/// in the lower tail where P itself underflows.
double log_gamma_p(double a, double y);
/// ln of the regularized upper incomplete gamma Q(a, y).
double log_gamma_q(double a, double y);

double gamma_log_pdf(double x, GammaParams p);
double gamma_cdf(double x, GammaParams p);

/// ln f_{chi^2_n}(x; nu). Poisson(nu/2) mixture of central chi-squared
/// densities summed outward from the largest term.
double nc_chi2_log_pdf(double x, NoncentralChi2Params p);
double nc_chi2_cdf(double x, NoncentralChi2Params p);
double nc_chi2_log_cdf(double x, NoncentralChi2Params p);
/// ln(1 - F_{chi^2_n}(x; nu)), summed directly so the upper tail keeps
/// full relative precision.
double nc_chi2_log_sf(double x, NoncentralChi2Params p);

/// Standard Gaussian tail Q(x) = P(N(0,1) > x).
double q_func(double x);
/// Inverse of q_func on (0, 1).
double q_inv(double p);

}  // namespace vlsf
