#pragma once

// Reference curves: AWGN capacity and the fixed-blocklength normal
// approximation without feedback,
//
//   R(n) = C - sqrt(V / n) Qinv(eps) + log2(n) / (2n),
//   C = 1/2 log2(1 + snr),
//   V = snr (snr + 2) / (2 (snr + 1)^2) * log2(e)^2,
//
// floored at zero.

#include "vlsf/bound.hpp"

namespace vlsf {

enum class BaselineKind { capacity, normal_approx };

struct BaselinePoint {
  double n = 0.0;
  double rate = 0.0;  // bits per channel use
  BaselineKind kind = BaselineKind::capacity;
  bool floored = false;  // the expansion went negative and was clamped to 0
};

double capacity(const ChannelParams& ch);

/// Channel dispersion in bits^2 per channel use.
double dispersion(const ChannelParams& ch);

/// Accepts a real n so it can be evaluated at an average blocklength.
BaselinePoint normal_approx(double n, const ChannelParams& ch, double eps);
double normal_approx_rate(double n, const ChannelParams& ch, double eps);

}  // namespace vlsf
