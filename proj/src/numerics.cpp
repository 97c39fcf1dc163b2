#include "vlsf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace vlsf {

namespace {

constexpr double kLn2 = 0.6931471805599453;
// Terms below this fraction of the running sum are dropped (1e-17).
constexpr double kSeriesCutoff = 1e-17;
const double kLogSeriesCutoff = std::log(kSeriesCutoff);
// Below this the linear-domain incomplete gamma has lost its relative
// precision to underflow and the log-domain expansions take over.
constexpr double kLinearFloor = 1e-280;

void require_non_negative(double x, const char* what) {
  if (!(x >= 0.0)) throw std::domain_error(std::string(what) + ": argument must be >= 0");
}

void check(const GammaParams& p) {
  if (!(p.shape > 0.0) || !(p.scale > 0.0) || !std::isfinite(p.shape) || !std::isfinite(p.scale)) {
    throw std::domain_error("gamma parameters must be positive and finite");
  }
}

void check(const NoncentralChi2Params& p) {
  if (p.dof < 1) throw std::domain_error("chi-squared degrees of freedom must be >= 1");
  if (!(p.noncentrality >= 0.0) || !std::isfinite(p.noncentrality)) {
    throw std::domain_error("non-centrality must be finite and >= 0");
  }
}

// ln of y^a e^{-y} / Gamma(a + 1).
double log_gamma_step(double a, double y) {
  return a * std::log(y) - y - log_gamma_fn(a + 1.0);
}

// ln P(a, y) through the power series P = d(a) * sum_j y^j / ((a+1)...(a+j)).
double log_gamma_p_series(double a, double y) {
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j < 100000; ++j) {
    term *= y / (a + j);
    sum += term;
    if (term < sum * 1e-17) return log_gamma_step(a, y) + std::log(sum);
  }
  throw NumericalError("incomplete gamma series did not converge");
}

// ln Q(a, y) through the Legendre continued fraction (modified Lentz).
double log_gamma_q_fraction(double a, double y) {
  constexpr double tiny = 1e-300;
  double b = y + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) {
      return a * std::log(y) - y - log_gamma_fn(a) + std::log(h);
    }
  }
  throw NumericalError("incomplete gamma continued fraction did not converge");
}

// log_pmf of Poisson(mean) at k.
double log_poisson(double mean, long k) {
  return k * std::log(mean) - mean - log_gamma_fn(k + 1.0);
}

}  // namespace

double log_gamma_fn(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double log_gamma_p(double a, double y) {
  if (y <= 0.0) return -kInf;
  if (std::isinf(y)) return 0.0;
  const double p = boost::math::gamma_p(a, y);
  if (p > kLinearFloor) return std::log(p);
  if (y < a + 1.0) return log_gamma_p_series(a, y);
  return log1m_exp(log_gamma_q(a, y));
}

double log_gamma_q(double a, double y) {
  if (y <= 0.0) return 0.0;
  if (std::isinf(y)) return -kInf;
  const double q = boost::math::gamma_q(a, y);
  if (q > kLinearFloor) return std::log(q);
  if (y > a + 1.0) return log_gamma_q_fraction(a, y);
  return log1m_exp(log_gamma_p(a, y));
}

double gamma_log_pdf(double x, GammaParams p) {
  check(p);
  require_non_negative(x, "gamma_log_pdf");
  if (x == 0.0) {
    if (p.shape > 1.0) return -kInf;
    if (p.shape == 1.0) return -std::log(p.scale);
    return kInf;
  }
  if (std::isinf(x)) return -kInf;
  return (p.shape - 1.0) * std::log(x) - x / p.scale - p.shape * std::log(p.scale) -
         log_gamma_fn(p.shape);
}

double gamma_cdf(double x, GammaParams p) {
  check(p);
  require_non_negative(x, "gamma_cdf");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(p.shape, x / p.scale);
}

double nc_chi2_log_pdf(double x, NoncentralChi2Params p) {
  check(p);
  require_non_negative(x, "nc_chi2_log_pdf");
  const double half_dof = 0.5 * p.dof;
  if (p.noncentrality == 0.0) return gamma_log_pdf(x, {half_dof, 2.0});
  const double mean = 0.5 * p.noncentrality;
  if (x == 0.0) {
    // Only the k = 0 mixture term survives at the origin.
    if (p.dof == 1) return kInf;
    if (p.dof == 2) return -kLn2 - mean;
    return -kInf;
  }
  if (std::isinf(x)) return -kInf;

  // Term k: Poisson(k; mean) * chi2_{n+2k}(x). Consecutive terms differ by
  // the factor c / ((k+1)(n/2+k)), so the sequence is log-concave in k.
  const double y = 0.5 * x;
  const double c = mean * y;
  const double root = 0.5 * (-(half_dof + 1.0) +
                             std::sqrt((half_dof - 1.0) * (half_dof - 1.0) + 4.0 * c));
  const long top = root > 0.0 ? static_cast<long>(std::floor(root)) + 1 : 0;

  const double log_top = log_poisson(mean, top) + (half_dof + top - 1.0) * std::log(y) - y -
                         kLn2 - log_gamma_fn(half_dof + top);
  double sum = 1.0;
  double term = 1.0;
  for (long k = top; ; ++k) {
    term *= c / ((k + 1.0) * (half_dof + k));
    sum += term;
    if (term < kSeriesCutoff * sum) break;
  }
  term = 1.0;
  for (long k = top; k > 0; --k) {
    term *= (k * (half_dof + k - 1.0)) / c;
    sum += term;
    if (term < kSeriesCutoff * sum) break;
  }
  return log_top + std::log(sum);
}

double nc_chi2_log_cdf(double x, NoncentralChi2Params p) {
  check(p);
  require_non_negative(x, "nc_chi2_cdf");
  const double half_dof = 0.5 * p.dof;
  const double y = 0.5 * x;
  if (x == 0.0) return -kInf;
  if (std::isinf(x)) return 0.0;
  if (p.noncentrality == 0.0) return log_gamma_p(half_dof, y);

  // F = sum_k Poisson(k; mean) P(n/2 + k, y). P falls with k, so terms above
  // the Poisson tail cutoff are negligible. Summing downward from there keeps
  // P(a-1) = P(a) + d(a-1) a sum of positive parts.
  const double mean = 0.5 * p.noncentrality;
  const long mode = static_cast<long>(std::floor(mean));
  long k = mode;
  double log_w = log_poisson(mean, k);
  const double log_w_mode = log_w;
  while (log_w - log_w_mode > kLogSeriesCutoff - 2.0) {
    log_w += std::log(mean / (k + 1.0));
    ++k;
  }

  double a = half_dof + k;
  double log_p = log_gamma_p(a, y);
  double log_d = log_gamma_step(a - 1.0, y);  // d(a-1)
  const double log_y = std::log(y);
  double log_sum = -kInf;
  double prev = -kInf;
  for (;; --k) {
    const double term = log_w + log_p;
    log_sum = log_add_exp(log_sum, term);
    if (k == 0) break;
    if (term < prev && term < log_sum + kLogSeriesCutoff) break;
    prev = term;
    log_p = log_add_exp(log_p, log_d);
    a -= 1.0;
    log_d += std::log(a) - log_y;
    log_w += std::log(k / mean);
  }
  return std::min(log_sum, 0.0);
}

double nc_chi2_cdf(double x, NoncentralChi2Params p) {
  return std::exp(nc_chi2_log_cdf(x, p));
}

double nc_chi2_log_sf(double x, NoncentralChi2Params p) {
  check(p);
  require_non_negative(x, "nc_chi2_sf");
  const double half_dof = 0.5 * p.dof;
  const double y = 0.5 * x;
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return -kInf;
  if (p.noncentrality == 0.0) return log_gamma_q(half_dof, y);

  // 1 - F = sum_k Poisson(k; mean) Q(n/2 + k, y), summed upward from k = 0
  // with Q(a+1) = Q(a) + d(a).
  const double mean = 0.5 * p.noncentrality;
  const double log_mean = std::log(mean);
  const double log_y = std::log(y);
  double a = half_dof;
  double log_q = log_gamma_q(a, y);
  double log_d = log_gamma_step(a, y);
  double log_w = -mean;
  double log_sum = -kInf;
  double prev = -kInf;
  for (long k = 0; k < 10000000; ++k) {
    const double term = log_w + log_q;
    log_sum = log_add_exp(log_sum, term);
    if (k > mean && term < prev && term < log_sum + kLogSeriesCutoff) {
      return std::min(log_sum, 0.0);
    }
    prev = term;
    log_q = log_add_exp(log_q, log_d);
    log_d += log_y - std::log(a + 1.0);
    a += 1.0;
    log_w += log_mean - std::log(k + 1.0);
  }
  throw NumericalError("non-central chi-squared survival series did not converge");
}

double q_func(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double q_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("q_inv: probability must lie in (0, 1)");
  return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

}  // namespace vlsf
