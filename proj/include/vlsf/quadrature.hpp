#pragma once

// Adaptive quadrature. Integrals over [a, inf) are accumulated panel by panel
// in the log domain so integrands far below the double range (large n) keep
// their relative precision.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>


#include "vlsf/numerics.hpp"

namespace vlsf {

struct QuadratureLimits {
  int max_panels = 10000;
  int max_segments = 500;
  int negligible_panels = 3;
};

namespace detail {

// 15-point Kronrod rule with its embedded 7-point Gauss rule (QUADPACK qk15).
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
};

template <class F>
Segment kronrod15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double fv1[7];
  double fv2[7];
  const double fc = f(centre);
  double gauss = fc * kGaussWeights[3];
  double kronrod = fc * kKronrodWeights[7];
  double abs_sum = std::fabs(kronrod);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    fv1[j] = f(centre - dx);
    fv2[j] = f(centre + dx);
    const double pair = fv1[j] + fv2[j];
    kronrod += kKronrodWeights[j] * pair;
    abs_sum += kKronrodWeights[j] * (std::fabs(fv1[j]) + std::fabs(fv2[j]));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  const double mean = 0.5 * kronrod;
  double asc = kKronrodWeights[7] * std::fabs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    asc += kKronrodWeights[j] * (std::fabs(fv1[j] - mean) + std::fabs(fv2[j] - mean));
  }
  const double value = kronrod * half;
  asc *= std::fabs(half);
  double error = std::fabs((kronrod - gauss) * half);
  if (asc != 0.0 && error != 0.0) error = asc * std::min(1.0, std::pow(200.0 * error / asc, 1.5));
  const double abs_value = abs_sum * std::fabs(half);
  if (abs_value > 1e-300 / 1.1e-14) error = std::max(50.0 * 2.220446049250313e-16 * abs_value, error);
  return {a, b, value, error};
}

// Globally adaptive bisection: split the segment with the largest error
// until the summed error drops below tol * |integral|.
template <class F>
double adaptive_kronrod(F&& f, double a, double b, double tol, int max_segments) {
  std::vector<Segment> segments;
  segments.push_back(kronrod15(f, a, b));
  double value = segments.front().value;
  double error = segments.front().error;
  auto worse = [](const Segment& x, const Segment& y) { return x.error < y.error; };
  while (error > tol * std::fabs(value) && error > 1e-300) {
    if (static_cast<int>(segments.size()) >= max_segments) {
      throw NumericalError("quadrature did not converge on [" + std::to_string(a) + ", " +
                           std::to_string(b) + "]");
    }
    std::pop_heap(segments.begin(), segments.end(), worse);
    const Segment top = segments.back();
    segments.pop_back();
    const double mid = 0.5 * (top.a + top.b);
    const Segment left = kronrod15(f, top.a, mid);
    const Segment right = kronrod15(f, mid, top.b);
    // Interval too narrow to split further without repeating abscissae.
    if (!(mid > top.a && mid < top.b)) {
      throw NumericalError("quadrature: interval collapsed near " + std::to_string(mid));
    }
    value += left.value + right.value - top.value;
    error += left.error + right.error - top.error;
    segments.push_back(left);
    std::push_heap(segments.begin(), segments.end(), worse);
    segments.push_back(right);
    std::push_heap(segments.begin(), segments.end(), worse);
  }
  if (!std::isfinite(value)) throw NumericalError("quadrature produced a non-finite value");
  return value;
}

// ln of the integral of exp(log_f) over [l, r]. With `open_left` the
// substitution x = l + t^2 absorbs an inverse-square-root singularity at l.
template <class LogF>
double log_panel(LogF& log_f, double l, double r, double tol, int max_segments,
                 bool open_left, double log_f_right) {
  const double mid = 0.5 * (l + r);
  double shift = std::max(log_f(mid), log_f_right);
  if (!open_left) shift = std::max(shift, log_f(l));
  if (shift == -kInf) return -kInf;
  if (!std::isfinite(shift)) throw NumericalError("non-finite integrand inside panel");

  double value = 0.0;
  if (open_left) {
    auto g = [&](double t) {
      const double lf = log_f(l + t * t);
      return lf == -kInf ? 0.0 : 2.0 * t * std::exp(lf - shift);
    };
    value = adaptive_kronrod(g, 0.0, std::sqrt(r - l), tol, max_segments);
  } else {
    auto g = [&](double x) {
      const double lf = log_f(x);
      return lf == -kInf ? 0.0 : std::exp(lf - shift);
    };
    value = adaptive_kronrod(g, l, r, tol, max_segments);
  }
  return value > 0.0 ? shift + std::log(value) : -kInf;
}

}  // namespace detail

/// ln of the integral of exp(log_f(x)) over [a, inf).
///
/// Panels of width `panel_width` are integrated by adaptive Gauss-Kronrod
/// until `negligible_panels` consecutive panels contribute less than
/// tol * (running sum), both in their integral and in the integrand value at
/// their right edge times the width. The integrand must be integrable with a
/// unimodal tail. Throws NumericalError when the panel budget is exhausted.
template <class LogF>
double log_integrate_semi_infinite(LogF&& log_f, double a, double tol, double panel_width,
                                   const QuadratureLimits& limits = {}) {
  if (!(tol > 0.0) || !(panel_width > 0.0)) {
    throw std::invalid_argument("log_integrate_semi_infinite: tol and panel width must be > 0");
  }
  const double log_tol = std::log(tol);
  const double log_width = std::log(panel_width);
  double log_sum = -kInf;
  int quiet = 0;
  for (int i = 0; i < limits.max_panels; ++i) {
    const double l = a + i * panel_width;
    const double r = l + panel_width;
    const double log_f_right = log_f(r);
    const double part =
        detail::log_panel(log_f, l, r, tol, limits.max_segments, i == 0, log_f_right);
    log_sum = log_add_exp(log_sum, part);
    const double threshold = log_sum + log_tol;
    if (part < threshold && log_f_right + log_width < threshold) {
      if (++quiet >= limits.negligible_panels) return log_sum;
    } else {
      quiet = 0;
    }
  }
  throw NumericalError("semi-infinite quadrature: panel limit reached");
}

/// Integral of a non-negative f over [a, inf); see log_integrate_semi_infinite.
template <class F>
double integrate_semi_infinite(F&& f, double a, double tol, double panel_width = 1.0,
                               const QuadratureLimits& limits = {}) {
  auto log_f = [&](double x) {
    const double v = f(x);
    return v > 0.0 ? std::log(v) : -kInf;
  };
  return std::exp(log_integrate_semi_infinite(log_f, a, tol, panel_width, limits));
}

/// Globally adaptive Gauss-Kronrod over [a, b] with relative tolerance tol.
template <class F>
double integrate_finite(F&& f, double a, double b, double tol, int max_segments = 500) {
  if (b <= a) return 0.0;
  return detail::adaptive_kronrod(f, a, b, tol, max_segments);
}

}  // namespace vlsf
