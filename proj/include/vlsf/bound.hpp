#pragma once

// Error-probability bound for minimum-distance decoding over the Gaussian
// channel with i.i.d. N(0, 1) random codewords.
//
// For a received prefix with squared norm nu and candidate minimum squared
// distance upsilon after n channel uses:
//
//   lambda1 = (M-1) f_{chi2_n}(upsilon; nu) *
//             int_upsilon^inf f_Gamma(x; n/2, 2/snr) f_{chi2_n}(nu; x) dx
//   lambda2 = f_Gamma(upsilon; n/2, 2/snr) f_{chi2_n}(nu; upsilon) *
//             (1 - F_{chi2_n}(upsilon; nu))
//   lambda  = lambda1 / (lambda1 + lambda2)
//
// lambda bounds the conditional probability that the observed minimum
// distance belongs to a wrong codeword. All terms are carried as logarithms.

#include <cstdint>
#include <optional>

namespace vlsf {

struct ChannelParams {
  double snr = 1.0;  // linear

  double signal_variance() const { return 1.0; }
  double noise_variance() const { return 1.0 / snr; }
  void validate() const;
};

struct CodeSpec {
  std::uint64_t message_count = 2;
  double error_threshold = 1e-3;

  double payload_bits() const;
  void validate() const;
};

struct LambdaQuery {
  int n;           // channel uses
  double upsilon;  // candidate minimum squared distance
  double nu;       // squared norm of the received prefix
};

inline constexpr double kDefaultQuadratureTol = 1e-8;

/// ln of int_upsilon^inf f_Gamma(x; n/2, 2/snr) f_{chi2_n}(nu; x) dx. With
/// upsilon = 0 this is the density of |Y^n|^2 at nu, Gamma(n/2, 2(1 + 1/snr)).
double log_output_tail(int n, double upsilon, double nu, const ChannelParams& ch,
                       double tol = kDefaultQuadratureTol);

/// ln lambda1. -inf when M = 1 or when the density at upsilon vanishes.
double log_lambda1(const LambdaQuery& q, const CodeSpec& code, const ChannelParams& ch,
                   double tol = kDefaultQuadratureTol);

/// ln lambda2.
double log_lambda2(const LambdaQuery& q, const CodeSpec& code, const ChannelParams& ch);

/// lambda in [0, 1]; nullopt when both components vanish (0/0), which
/// callers treat as "keep transmitting".
std::optional<double> lambda(const LambdaQuery& q, const CodeSpec& code, const ChannelParams& ch,
                             double tol = kDefaultQuadratureTol);

/// The bound before any channel output: the error of a uniform guess, (M-1)/M.
double lambda_at_zero(const CodeSpec& code);

/// Width of one quadrature panel for the lambda1 integral: the standard
/// deviation sqrt(n/2) * 2/snr of the gamma factor.
double lambda1_panel_width(int n, const ChannelParams& ch);

}  // namespace vlsf
