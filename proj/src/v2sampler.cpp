#include "vlsf/v2sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vlsf/numerics.hpp"
#include "vlsf/quadrature.hpp"

namespace vlsf {

namespace {

void check_state(const V2State& st) {
  if (st.n < 1) throw std::invalid_argument("V2 state has no symbols yet; use init_v2");
  if (!(st.k >= 0.0) || !(st.eta >= 0.0)) throw std::invalid_argument("V2 state must be >= 0");
}

void check_uniform(double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("uniform variate must lie in (0, 1)");
}

// Distribution of the minimum of `count` i.i.d. copies with cdf F.
double min_cdf(double f, double count) {
  if (f >= 1.0) return 1.0;
  return -std::expm1(count * std::log1p(-f));
}

// Illinois-modified regula falsi on a bracket with g(lo) <= 0 <= g(hi).
template <class G>
double solve_bracketed(G&& g, double lo, double hi, double g_lo, double g_hi, double g_tol) {
  int side = 0;
  for (int iter = 0; iter < 200; ++iter) {
    if (g_hi - g_lo <= 0.0) return 0.5 * (lo + hi);
    double x = hi - g_hi * (hi - lo) / (g_hi - g_lo);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    const double gx = g(x);
    if (std::fabs(gx) <= g_tol || hi - lo <= 1e-15 * std::max(1.0, hi)) return x;
    if (gx < 0.0) {
      lo = x;
      g_lo = gx;
      if (side == -1) g_hi *= 0.5;
      side = -1;
    } else {
      hi = x;
      g_hi = gx;
      if (side == 1) g_lo *= 0.5;
      side = 1;
    }
  }
  throw NumericalError("quantile inversion did not converge");
}

// Quantile of the untracked-competitor minimum on a bracket [lo, hi] with
// F(lo) <= u <= F(hi).
double invert_z2(double u, double y_n, const V2State& st, double count, double tol, double lo,
                 double hi, double f_hi) {
  auto g = [&](double x) { return min_cdf(cdf_w(x, y_n, st, tol), count) - u; };
  return solve_bracketed(g, lo, hi, -u, f_hi - u, kQuantileTolerance);
}

}  // namespace

double chi2_1_cdf(double x, double delta) {
  if (!(x >= 0.0) || !(delta >= 0.0)) throw std::domain_error("chi2_1_cdf: negative argument");
  if (x == 0.0) return 0.0;
  const double root_x = std::sqrt(x);
  const double root_d = std::sqrt(delta);
  const double a = (root_d - root_x) / std::sqrt(2.0);
  const double b = (root_d + root_x) / std::sqrt(2.0);
  if (a < 0.0) return 1.0 - 0.5 * (std::erfc(-a) + std::erfc(b));
  const double upper = std::erfc(a);
  const double value = 0.5 * (upper - std::erfc(b));
  if (value > 1e-3 * upper) return value;
  return nc_chi2_cdf(x, {1, delta});
}

double f_w2(double x, const V2State& st) {
  check_state(st);
  if (x < st.k) return 0.0;
  const NoncentralChi2Params prior{st.n, st.eta};
  const double log_mass = nc_chi2_log_sf(st.k, prior);
  if (log_mass == -kInf) throw NumericalError("truncated chi-squared mass underflows");
  return std::exp(nc_chi2_log_pdf(x, prior) - log_mass);
}

double cdf_w(double w, double y_n, const V2State& st, double tol) {
  check_state(st);
  if (!(w >= 0.0)) throw std::domain_error("cdf_w: w must be >= 0");
  if (w <= st.k) return 0.0;
  const NoncentralChi2Params prior{st.n, st.eta};
  const double delta = y_n * y_n;
  // chi2_1(delta) + chi2_{n-1}(eta) is chi2_n(eta + delta).
  const double full = nc_chi2_cdf(w, {st.n + 1, st.eta + delta});
  if (st.k == 0.0) return std::clamp(full, 0.0, 1.0);

  const double log_mass = nc_chi2_log_sf(st.k, prior);
  if (log_mass == -kInf) throw NumericalError("truncated chi-squared mass underflows");
  auto weighted = [&](double x) {
    const double lf = nc_chi2_log_pdf(x, prior);
    return lf == -kInf ? 0.0 : chi2_1_cdf(w - x, delta) * std::exp(lf);
  };

  // Mass of the untruncated sum that comes from W2 < k; x = t^2 absorbs the
  // density singularity at the origin for one degree of freedom. When w sits
  // within about one W1 spread of k, the sqrt(w - x) kink of the W1 factor is
  // too close to the interval end, so that case goes to the direct form.
  const bool near_kink = w - st.k < 1.0 + delta;
  const double removed =
      near_kink ? full
                : integrate_finite(
                      [&](double t) { return t == 0.0 ? 0.0 : 2.0 * t * weighted(t * t); }, 0.0,
                      std::sqrt(st.k), tol);

  double numerator = full - removed;
  if (removed > 0.5 * full) {
    // The difference has cancelled; integrate W2 >= k directly instead, in
    // offsets r = x - k so that w - x = d - r keeps full precision. The W1
    // factor behaves like sqrt(d - r) at the top, hence r = d - s^2.
    const double d = w - st.k;
    const double half = 0.5 * d;
    auto at_offset = [&](double r, double w1) {
      const double lf = nc_chi2_log_pdf(st.k + r, prior);
      return lf == -kInf ? 0.0 : chi2_1_cdf(w1, delta) * std::exp(lf);
    };
    double lower = 0.0;
    if (st.n == 1 && st.k < d) {
      // One degree of freedom: keep x = t^2 for the origin singularity.
      lower = integrate_finite(
          [&](double t) { return 2.0 * t * weighted(t * t); }, std::sqrt(st.k),
          std::sqrt(st.k + half), tol);
    } else {
      lower = integrate_finite([&](double r) { return at_offset(r, d - r); }, 0.0, half, tol);
    }
    const double upper = integrate_finite(
        [&](double s) { return s == 0.0 ? 0.0 : 2.0 * s * at_offset(d - s * s, s * s); }, 0.0,
        std::sqrt(half), tol);
    numerator = lower + upper;
  }
  return std::clamp(numerator / std::exp(log_mass), 0.0, 1.0);
}

double sample_z2(double u, double y_n, const V2State& st, std::uint64_t message_count,
                 double tol) {
  check_state(st);
  check_uniform(u);
  if (message_count < 2) throw std::invalid_argument("sample_z2 needs M >= 2");
  if (message_count == 2) return kInf;
  const double count = static_cast<double>(message_count - 2);

  // Expand an upper bracket from k until the minimum's cdf passes u.
  double step = 1.0 + y_n * y_n;
  double hi = st.k + step;
  double f_hi = min_cdf(cdf_w(hi, y_n, st, tol), count);
  for (int i = 0; f_hi < u; ++i) {
    if (i > 200) throw NumericalError("sample_z2: bracket expansion failed");
    step *= 2.0;
    hi = st.k + step;
    f_hi = min_cdf(cdf_w(hi, y_n, st, tol), count);
  }
  return invert_z2(u, y_n, st, count, tol, st.k, hi, f_hi);
}

V2State advance_v2(const V2State& st, double y_n, std::uint64_t message_count, double gauss,
                   double u, double tol) {
  check_state(st);
  check_uniform(u);
  if (message_count < 2) throw std::invalid_argument("advance_v2 needs M >= 2");
  const double z1 = (gauss + y_n) * (gauss + y_n);
  const double tracked = st.k + z1;
  double next = tracked;
  if (message_count > 2) {
    // An untracked competitor takes over only when its distance falls below
    // the tracked one's, so the quantile is needed only inside [k, k + Z1].
    const double count = static_cast<double>(message_count - 2);
    const double f_tracked = min_cdf(cdf_w(tracked, y_n, st, tol), count);
    if (u < f_tracked) next = invert_z2(u, y_n, st, count, tol, st.k, tracked, f_tracked);
  }
  return {next, st.eta + y_n * y_n, st.n + 1};
}

V2State init_v2(double y_1, std::uint64_t message_count, double u) {
  check_uniform(u);
  if (message_count < 2) throw std::invalid_argument("init_v2 needs M >= 2");
  const double count = static_cast<double>(message_count - 1);
  const double delta = y_1 * y_1;
  // Solve in s = sqrt(x), where the distribution function is smooth at 0.
  auto g = [&](double s) { return min_cdf(chi2_1_cdf(s * s, delta), count) - u; };
  double hi = 1.0 + std::sqrt(delta);
  double g_hi = g(hi);
  for (int i = 0; g_hi < 0.0; ++i) {
    if (i > 200) throw NumericalError("init_v2: bracket expansion failed");
    hi *= 2.0;
    g_hi = g(hi);
  }
  const double s = solve_bracketed(g, 0.0, hi, -u, g_hi, kQuantileTolerance);
  return {s * s, delta, 1};
}

}  // namespace vlsf
