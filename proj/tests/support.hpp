#pragma once

// Test-side oracles. Nothing here is used by the library: extended-precision
// Poisson mixtures for the non-central chi-squared law, and Kolmogorov-Smirnov
// statistics with their asymptotic p-values.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using mp = boost::multiprecision::cpp_bin_float_50;

// Poisson(nu/2) mixture of central chi-squared densities, terms generated by
// their ratio from k = 0. Up to 2000 terms, stopping once past the Poisson
// mode and below 1e-40 of the sum.
inline mp nc_chi2_pdf(double x_in, int n, double nu_in) {
  const mp x = x_in, nu = nu_in, half_n = mp(n) / 2;
  if (x <= 0) return 0;
  const mp lam = nu / 2;
  // k = 0: e^{-lam} x^{n/2-1} e^{-x/2} / (2^{n/2} Gamma(n/2))
  mp term = exp(-lam + (half_n - 1) * log(x) - x / 2 - half_n * log(mp(2)) -
                boost::math::lgamma(half_n));
  mp sum = term;
  for (int k = 0; k < 2000; ++k) {
    if (lam == 0) break;
    term *= lam / (k + 1) * (x / 2) / (half_n + k);
    sum += term;
    if (k > lam && term < sum * mp(1e-40)) break;
  }
  return sum;
}

// Poisson(nu/2) mixture of regularised lower incomplete gamma functions.
inline mp nc_chi2_cdf(double x_in, int n, double nu_in) {
  const mp x = x_in, lam = mp(nu_in) / 2, half_n = mp(n) / 2;
  if (x <= 0) return 0;
  mp weight = exp(-lam);
  mp sum = 0;
  for (int k = 0; k < 2000; ++k) {
    if (k > 0) weight *= lam / k;
    const mp term = weight * boost::math::gamma_p(half_n + k, x / 2);
    sum += term;
    if (lam == 0) break;
    if (k > lam && term < sum * mp(1e-40)) break;
  }
  return sum;
}

inline mp nc_chi2_sf(double x_in, int n, double nu_in) {
  const mp x = x_in, lam = mp(nu_in) / 2, half_n = mp(n) / 2;
  if (x <= 0) return 1;
  mp weight = exp(-lam);
  mp sum = 0;
  for (int k = 0; k < 2000; ++k) {
    if (k > 0) weight *= lam / k;
    const mp term = weight * boost::math::gamma_q(half_n + k, x / 2);
    sum += term;
    if (lam == 0) break;
    if (k > lam && k > x_in && term < sum * mp(1e-40)) break;
  }
  return sum;
}

inline mp gamma_pdf(double x_in, double shape, double scale) {
  const mp x = x_in, a = shape, s = scale;
  return exp((a - 1) * log(x) - x / s - a * log(s) - boost::math::lgamma(a));
}

inline double rel_err(double got, const mp& want) {
  if (want == 0) return got == 0 ? 0.0 : 1.0;
  return static_cast<double>(abs((mp(got) - want) / want));
}

// Asymptotic Kolmogorov distribution with the Stephens small-sample
// correction; n_eff is N for one sample and nm/(n+m) for two.
inline double ks_pvalue(double d, double n_eff) {
  const double root = std::sqrt(n_eff);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

inline double ks_pvalue(std::vector<double> xs, const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(xs.size());
  return ks_pvalue(ks_statistic(std::move(xs), cdf), n);
}

inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(i / na - j / nb));
  }
  return ks_pvalue(d, na * nb / (na + nb));
}

}  // namespace oracle
