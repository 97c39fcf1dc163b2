#pragma once

// Monte Carlo evaluation of the stopping time of the variable-length
// stop-feedback scheme. Each trial tracks only the sufficient statistics
// (V1 = |Z^n|^2, Lambda = |Y^n|^2 and, for the KN rule, the sampled competing
// minimum V2); the validation mode materialises an explicit codebook and the
// literal minimum-distance decoder instead.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vlsf/bound.hpp"
#include "vlsf/numerics.hpp"
#include "vlsf/rng.hpp"
#include "vlsf/v2sampler.hpp"

namespace vlsf {

enum class StoppingRule { v1, kn };

std::string to_string(StoppingRule rule);
StoppingRule parse_rule(const std::string& text);

struct SimConfig {
  std::uint64_t trials = 10000;
  int n_max = 0;  // 0 selects default_n_max()
  std::uint64_t seed = 1;
  int check_stride = 1;
  StoppingRule rule = StoppingRule::v1;
  double tol = kDefaultQuadratureTol;
  double censor_limit = 1e-3;
  unsigned workers = 0;  // 0 selects the hardware concurrency

  void validate() const;
};

/// ceil(8 max(log2 M, log2(1/eps)) / C), at least 1.
int default_n_max(const CodeSpec& code, const ChannelParams& ch);
int resolve_n_max(const SimConfig& cfg, const CodeSpec& code, const ChannelParams& ch);

struct TrialState {
  int n = 0;
  double v1 = 0.0;   // |Z^n|^2
  double lam = 0.0;  // |Y^n|^2
  std::optional<V2State> v2;
  double last_y = 0.0;
};

struct TrialRecord {
  int tau = 0;
  bool censored = false;
  double stop_lambda = 0.0;
  StoppingRule rule = StoppingRule::v1;
};

/// Censoring above the configured fraction biases E[tau] low, which would
/// overstate the achievable rate.
class CensoringError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

struct BoundResult {
  std::uint64_t message_count = 0;
  std::uint64_t trials = 0;
  int n_max = 0;
  double mean_tau = 0.0;
  double ci_halfwidth = 0.0;          // 95% normal interval on mean_tau
  std::optional<double> rate;         // log2(M) / mean_tau; absent when mean_tau = 0
  std::vector<std::pair<int, std::uint64_t>> tau_counts;  // sparse histogram, ascending tau
  std::uint64_t censored = 0;
  double censored_fraction = 0.0;

  double pmf(int tau) const;
};

/// Appends channel use n (1-based) of `trial` to the state: X, Z drawn from
/// the channel stream, Y = X + Z.
void append_channel_symbol(TrialState& state, const CounterRng& rng, std::uint64_t trial,
                           const ChannelParams& ch);

/// Statistics after exactly n channel uses, ignoring the stopping rule.
TrialState simulate_statistics(std::uint64_t trial, int n, const SimConfig& cfg,
                               const ChannelParams& ch);

TrialRecord run_trial(std::uint64_t trial, const SimConfig& cfg, const CodeSpec& code,
                      const ChannelParams& ch);

/// Aggregate of cfg.trials trials. Bit-identical for a given seed whatever
/// the worker count. Throws CensoringError past cfg.censor_limit.
BoundResult estimate_bound(const SimConfig& cfg, const CodeSpec& code, const ChannelParams& ch);

/// Aggregation step of estimate_bound, exposed for testing.
BoundResult summarize_trials(const std::vector<TrialRecord>& records, const CodeSpec& code,
                             int n_max);

struct SweepPoint {
  std::uint64_t message_count = 0;
  std::optional<BoundResult> result;
  std::string error;  // set when the point failed
};

/// One estimate per message count, all driven by cfg.seed so points share
/// common random numbers. Failures are recorded per point.
std::vector<SweepPoint> run_sweep(const std::vector<std::uint64_t>& message_counts,
                                  const SimConfig& cfg, double error_threshold,
                                  const ChannelParams& ch);

struct GenieOutcome {
  TrialRecord record;
  bool error = false;
};

inline constexpr std::uint64_t kMaxGenieMessages = 10000;

/// One trial with an explicit Gaussian codebook: message 1 is sent, the same
/// lambda stopping rule runs on the true distances (rule v1: the transmitted
/// codeword's distance; rule kn: the minimum over all codewords), and at tau
/// the decoder picks the codeword at minimum distance.
GenieOutcome genie_trial(std::uint64_t trial, const SimConfig& cfg, const CodeSpec& code,
                         const ChannelParams& ch);

struct ValidationResult {
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
  double error_rate = 0.0;
  double standard_error = 0.0;  // sqrt(eps (1 - eps) / trials)
  double threshold = 0.0;       // eps + 3 standard errors
  double mean_tau = 0.0;
  std::uint64_t censored = 0;
  bool pass = false;
};

ValidationResult validate_genie(const SimConfig& cfg, const CodeSpec& code,
                                const ChannelParams& ch);

}  // namespace vlsf
