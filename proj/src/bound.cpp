#include "vlsf/bound.hpp"

#include <cmath>
#include <stdexcept>

#include "vlsf/numerics.hpp"
#include "vlsf/quadrature.hpp"

namespace vlsf {

void ChannelParams::validate() const {
  if (!(snr > 0.0) || !std::isfinite(snr)) throw std::invalid_argument("snr must be positive");
}

double CodeSpec::payload_bits() const { return std::log2(static_cast<double>(message_count)); }

void CodeSpec::validate() const {
  if (message_count < 1) throw std::invalid_argument("message count must be >= 1");
  if (!(error_threshold >= 0.0 && error_threshold <= 1.0)) {
    throw std::invalid_argument("error threshold must lie in [0, 1]");
  }
}

namespace {

void check_query(const LambdaQuery& q) {
  if (q.n < 1) throw std::invalid_argument("lambda query needs n >= 1");
  if (!(q.upsilon >= 0.0) || !(q.nu >= 0.0)) {
    throw std::invalid_argument("lambda query arguments must be >= 0");
  }
}

GammaParams distance_law(int n, const ChannelParams& ch) { return {0.5 * n, 2.0 / ch.snr}; }

}  // namespace

double lambda1_panel_width(int n, const ChannelParams& ch) {
  return std::sqrt(0.5 * n) * 2.0 / ch.snr;
}

double log_output_tail(int n, double upsilon, double nu, const ChannelParams& ch, double tol) {
  if (n < 1) throw std::invalid_argument("log_output_tail needs n >= 1");
  if (!(upsilon >= 0.0) || !(nu >= 0.0)) {
    throw std::invalid_argument("log_output_tail arguments must be >= 0");
  }
  // With nu = 0 the received-norm density vanishes for every x once n >= 3.
  if (nu == 0.0 && n >= 3) return -kInf;
  const GammaParams gamma = distance_law(n, ch);
  auto log_integrand = [&](double x) {
    return gamma_log_pdf(x, gamma) + nc_chi2_log_pdf(nu, {n, x});
  };
  return log_integrate_semi_infinite(log_integrand, upsilon, tol, lambda1_panel_width(n, ch));
}

double log_lambda1(const LambdaQuery& q, const CodeSpec& code, const ChannelParams& ch,
                   double tol) {
  check_query(q);
  if (code.message_count <= 1) return -kInf;
  const double log_density = nc_chi2_log_pdf(q.upsilon, {q.n, q.nu});
  if (log_density == -kInf) return -kInf;
  const double log_integral = log_output_tail(q.n, q.upsilon, q.nu, ch, tol);
  if (log_integral == -kInf) return -kInf;
  return std::log(static_cast<double>(code.message_count - 1)) + log_density + log_integral;
}

double log_lambda2(const LambdaQuery& q, const CodeSpec& code, const ChannelParams& ch) {
  check_query(q);
  (void)code;
  return gamma_log_pdf(q.upsilon, distance_law(q.n, ch)) +
         nc_chi2_log_pdf(q.nu, {q.n, q.upsilon}) + nc_chi2_log_sf(q.upsilon, {q.n, q.nu});
}

std::optional<double> lambda(const LambdaQuery& q, const CodeSpec& code, const ChannelParams& ch,
                             double tol) {
  if (code.message_count <= 1) return 0.0;
  const double l1 = log_lambda1(q, code, ch, tol);
  const double l2 = log_lambda2(q, code, ch);
  if (l1 == -kInf && l2 == -kInf) return std::nullopt;
  if (l1 == kInf && l2 == kInf) return std::nullopt;
  const double diff = l2 - l1;
  if (std::isnan(diff)) return std::nullopt;
  return 1.0 / (1.0 + std::exp(diff));
}

double lambda_at_zero(const CodeSpec& code) {
  if (code.message_count < 1) throw std::invalid_argument("message count must be >= 1");
  const double m = static_cast<double>(code.message_count);
  return (m - 1.0) / m;
}

}  // namespace vlsf
