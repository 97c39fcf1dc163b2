#pragma once

// Recursive sampler for the minimum squared distance V2 between the channel
// output and the M-1 codewords that were not transmitted.
//
// After n-1 symbols the running minimum is k and every other competitor is
// known only to be at distance >= k from the output. On symbol n:
//   - the current minimiser moves by Z1 ~ chi2_1(y_n^2);
//   - each of the other M-2 competitors sits at W = W1 + W2, with
//     W1 ~ chi2_1(y_n^2) and W2 ~ chi2_{n-1}(eta) truncated to [k, inf),
//     eta = |y^{n-1}|^2;
//   - the new minimum is min(k + Z1, min of M-2 copies of W).
// The minimum of M-2 copies of W is drawn by inverting
// F(x) = 1 - (1 - F_W(x))^(M-2).

#include <cstdint>

namespace vlsf {

struct V2State {
  double k = 0.0;    // running minimum distance V2 after n symbols
  double eta = 0.0;  // |y^n|^2, the non-centrality seen by the next step
  int n = 0;         // symbols folded in so far
};

/// Absolute tolerance, in probability, on every quantile inversion.
inline constexpr double kQuantileTolerance = 1e-10;

/// Density of W2: chi2_n(eta) truncated to [k, inf) with n = st.n.
/// Throws NumericalError if the truncated mass underflows.
double f_w2(double x, const V2State& st);

/// Distribution function of W = W1 + W2 for the step that appends y_n.
double cdf_w(double w, double y_n, const V2State& st, double tol);

/// Minimum of the M-2 untracked competitors' distances, by inverse transform
/// of uniform u. +inf when M = 2 (no such competitor).
double sample_z2(double u, double y_n, const V2State& st, std::uint64_t message_count,
                 double tol);

/// One recursion step. `gauss` is a standard normal (drives Z1) and `u` a
/// uniform on (0, 1) (drives the untracked competitors).
V2State advance_v2(const V2State& st, double y_n, std::uint64_t message_count, double gauss,
                   double u, double tol);

/// Base case: minimum of M-1 independent chi2_1(y_1^2) distances, drawn by
/// inverse transform of uniform u.
V2State init_v2(double y_1, std::uint64_t message_count, double u);

/// chi2_1(delta) distribution function; closed form through erfc with a
/// series fallback where the closed form cancels.
double chi2_1_cdf(double x, double delta);

}  // namespace vlsf
