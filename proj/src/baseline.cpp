#include "vlsf/baseline.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vlsf/numerics.hpp"

namespace vlsf {

double capacity(const ChannelParams& ch) {
  if (!(ch.snr >= 0.0)) throw std::invalid_argument("capacity: snr must be >= 0");
  return 0.5 * std::log2(1.0 + ch.snr);
}

double dispersion(const ChannelParams& ch) {
  const double s = ch.snr;
  return s * (s + 2.0) / (2.0 * (s + 1.0) * (s + 1.0)) * std::numbers::log2e * std::numbers::log2e;
}

BaselinePoint normal_approx(double n, const ChannelParams& ch, double eps) {
  if (!(n >= 1.0)) throw std::invalid_argument("normal approximation needs n >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("normal approximation needs eps in (0, 1)");
  const double rate =
      capacity(ch) - std::sqrt(dispersion(ch) / n) * q_inv(eps) + std::log2(n) / (2.0 * n);
  BaselinePoint point{n, rate, BaselineKind::normal_approx, false};
  if (rate < 0.0) {
    point.rate = 0.0;
    point.floored = true;
  }
  return point;
}

double normal_approx_rate(double n, const ChannelParams& ch, double eps) {
  return normal_approx(n, ch, eps).rate;
}

}  // namespace vlsf
