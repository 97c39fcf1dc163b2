#include "vlsf/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "vlsf/baseline.hpp"

namespace vlsf {

std::string to_string(StoppingRule rule) { return rule == StoppingRule::kn ? "kn" : "v1"; }

StoppingRule parse_rule(const std::string& text) {
  if (text == "v1" || text == "V1") return StoppingRule::v1;
  if (text == "kn" || text == "KN") return StoppingRule::kn;
  throw std::invalid_argument("unknown stopping rule '" + text + "' (expected v1 or kn)");
}

void SimConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 1 (or 0 for the default)");
  if (check_stride < 1) throw std::invalid_argument("check stride must be >= 1");
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("quadrature tolerance must be in (0, 1)");
  if (!(censor_limit >= 0.0 && censor_limit <= 1.0)) {
    throw std::invalid_argument("censor limit must lie in [0, 1]");
  }
}

int default_n_max(const CodeSpec& code, const ChannelParams& ch) {
  // Small M still needs about log2(1/eps) / C uses to push lambda below eps.
  double bits = code.payload_bits();
  if (code.error_threshold > 0.0) bits = std::max(bits, -std::log2(code.error_threshold));
  const double n = std::ceil(8.0 * bits / capacity(ch));
  return std::max(1, static_cast<int>(n));
}

int resolve_n_max(const SimConfig& cfg, const CodeSpec& code, const ChannelParams& ch) {
  return cfg.n_max > 0 ? cfg.n_max : default_n_max(code, ch);
}

double BoundResult::pmf(int tau) const {
  if (trials == 0) return 0.0;
  auto it = std::lower_bound(tau_counts.begin(), tau_counts.end(), tau,
                             [](const auto& entry, int t) { return entry.first < t; });
  if (it == tau_counts.end() || it->first != tau) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(trials);
}

namespace {

// Runs fn(i) for i in [0, count) on `workers` threads. The first exception
// stops further work and is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::uint64_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, count));
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

bool stop_now(const std::optional<double>& value, double eps) {
  return value.has_value() && *value <= eps;
}

}  // namespace

void append_channel_symbol(TrialState& state, const CounterRng& rng, std::uint64_t trial,
                           const ChannelParams& ch) {
  state.n += 1;
  const auto [x, g] = rng.normals(Stream::channel, trial, static_cast<std::uint64_t>(state.n));
  const double z = g * std::sqrt(ch.noise_variance());
  const double y = x + z;
  state.v1 += z * z;
  state.lam += y * y;
  state.last_y = y;
}

TrialState simulate_statistics(std::uint64_t trial, int n, const SimConfig& cfg,
                               const ChannelParams& ch) {
  const CounterRng rng(cfg.seed);
  TrialState state;
  for (int i = 0; i < n; ++i) append_channel_symbol(state, rng, trial, ch);
  return state;
}

TrialRecord run_trial(std::uint64_t trial, const SimConfig& cfg, const CodeSpec& code,
                      const ChannelParams& ch) {
  TrialRecord record;
  record.rule = cfg.rule;
  record.stop_lambda = lambda_at_zero(code);
  if (record.stop_lambda <= code.error_threshold) return record;

  const CounterRng rng(cfg.seed);
  const int n_max = resolve_n_max(cfg, code, ch);
  const std::uint64_t m = code.message_count;
  TrialState state;
  try {
    while (state.n < n_max) {
      append_channel_symbol(state, rng, trial, ch);
      if (cfg.rule == StoppingRule::kn) {
        const auto index = static_cast<std::uint64_t>(state.n);
        const double u = rng.uniforms(Stream::competitor, trial, 2 * index + 1)[0];
        if (!state.v2) {
          state.v2 = init_v2(state.last_y, m, u);
        } else {
          const double g = rng.normals(Stream::competitor, trial, 2 * index)[0];
          state.v2 = advance_v2(*state.v2, state.last_y, m, g, u, cfg.tol);
        }
      }
      if (state.n % cfg.check_stride != 0) continue;
      const double upsilon =
          state.v2 ? std::min(state.v1, state.v2->k) : state.v1;
      const auto value = lambda({state.n, upsilon, state.lam}, code, ch, cfg.tol);
      if (value) record.stop_lambda = *value;
      if (stop_now(value, code.error_threshold)) {
        record.tau = state.n;
        return record;
      }
    }
  } catch (const NumericalError& e) {
    throw NumericalError("trial " + std::to_string(trial) + " at n=" + std::to_string(state.n) +
                         ": " + e.what());
  }
  record.tau = n_max;
  record.censored = true;
  return record;
}

BoundResult summarize_trials(const std::vector<TrialRecord>& records, const CodeSpec& code,
                             int n_max) {
  BoundResult result;
  result.message_count = code.message_count;
  result.trials = records.size();
  result.n_max = n_max;
  if (records.empty()) return result;

  std::map<int, std::uint64_t> histogram;
  std::uint64_t total = 0;
  for (const auto& r : records) {
    total += static_cast<std::uint64_t>(r.tau);
    histogram[r.tau] += 1;
    if (r.censored) ++result.censored;
  }
  const double count = static_cast<double>(records.size());
  // Integer stopping times: the sum is exact, so the mean does not depend on
  // the order trials finished in.
  result.mean_tau = static_cast<double>(total) / count;
  if (records.size() > 1) {
    double squares = 0.0;
    for (const auto& [tau, hits] : histogram) {
      const double d = tau - result.mean_tau;
      squares += d * d * static_cast<double>(hits);
    }
    const double variance = squares / (count - 1.0);
    result.ci_halfwidth = 1.959963984540054 * std::sqrt(variance / count);
  }
  if (code.message_count > 1 && result.mean_tau > 0.0) {
    result.rate = code.payload_bits() / result.mean_tau;
  }
  result.tau_counts.assign(histogram.begin(), histogram.end());
  result.censored_fraction = static_cast<double>(result.censored) / count;
  return result;
}

BoundResult estimate_bound(const SimConfig& cfg, const CodeSpec& code, const ChannelParams& ch) {
  cfg.validate();
  code.validate();
  ch.validate();
  std::vector<TrialRecord> records(cfg.trials);
  parallel_for(cfg.trials, cfg.workers,
               [&](std::uint64_t i) { records[i] = run_trial(i, cfg, code, ch); });
  BoundResult result = summarize_trials(records, code, resolve_n_max(cfg, code, ch));
  if (result.censored_fraction > cfg.censor_limit) {
    throw CensoringError("censored fraction " + std::to_string(result.censored_fraction) +
                         " exceeds limit " + std::to_string(cfg.censor_limit) +
                         "; raise n_max");
  }
  return result;
}

std::vector<SweepPoint> run_sweep(const std::vector<std::uint64_t>& message_counts,
                                  const SimConfig& cfg, double error_threshold,
                                  const ChannelParams& ch) {
  if (message_counts.empty()) throw std::invalid_argument("sweep needs at least one M");
  std::vector<SweepPoint> points;
  points.reserve(message_counts.size());
  for (const std::uint64_t m : message_counts) {
    SweepPoint point;
    point.message_count = m;
    try {
      if (m < 2) throw std::invalid_argument("sweep points need M >= 2");
      point.result = estimate_bound(cfg, CodeSpec{m, error_threshold}, ch);
    } catch (const std::exception& e) {
      point.error = e.what();
    }
    points.push_back(std::move(point));
  }
  return points;
}

GenieOutcome genie_trial(std::uint64_t trial, const SimConfig& cfg, const CodeSpec& code,
                         const ChannelParams& ch) {
  const std::uint64_t m = code.message_count;
  if (m > kMaxGenieMessages) {
    throw std::invalid_argument("validation mode materialises the codebook; M must be <= " +
                                std::to_string(kMaxGenieMessages));
  }
  const CounterRng rng(cfg.seed);
  GenieOutcome outcome;
  outcome.record.rule = cfg.rule;
  outcome.record.stop_lambda = lambda_at_zero(code);
  if (m == 1) return outcome;
  if (outcome.record.stop_lambda <= code.error_threshold) {
    const double u = rng.uniforms(Stream::guess, trial, 0)[0];
    const auto guess = std::min<std::uint64_t>(static_cast<std::uint64_t>(u * m), m - 1);
    outcome.error = guess != 0;
    return outcome;
  }

  const int n_max = resolve_n_max(cfg, code, ch);
  const std::uint64_t pairs = (m + 1) / 2;
  const double noise_sd = std::sqrt(ch.noise_variance());
  std::vector<double> distance(m, 0.0);
  std::vector<double> symbol(2 * pairs);
  double lam = 0.0;
  int n = 0;
  bool stopped = false;
  while (n < n_max) {
    ++n;
    const auto base = static_cast<std::uint64_t>(n) * pairs;
    for (std::uint64_t p = 0; p < pairs; ++p) {
      const auto g = rng.normals(Stream::codebook, trial, base + p);
      symbol[2 * p] = g[0];
      symbol[2 * p + 1] = g[1];
    }
    const double z = rng.normals(Stream::channel, trial, static_cast<std::uint64_t>(n))[1] * noise_sd;
    const double y = symbol[0] + z;
    lam += y * y;
    for (std::uint64_t j = 0; j < m; ++j) {
      const double d = symbol[j] - y;
      distance[j] += d * d;
    }
    if (n % cfg.check_stride != 0) continue;
    const double upsilon = cfg.rule == StoppingRule::kn
                               ? *std::min_element(distance.begin(), distance.end())
                               : distance[0];
    const auto value = lambda({n, upsilon, lam}, code, ch, cfg.tol);
    if (value) outcome.record.stop_lambda = *value;
    if (stop_now(value, code.error_threshold)) {
      stopped = true;
      break;
    }
  }
  outcome.record.tau = n;
  outcome.record.censored = !stopped;
  const auto decoded = std::min_element(distance.begin(), distance.end()) - distance.begin();
  outcome.error = decoded != 0;
  return outcome;
}

ValidationResult validate_genie(const SimConfig& cfg, const CodeSpec& code,
                                const ChannelParams& ch) {
  cfg.validate();
  code.validate();
  ch.validate();
  std::vector<GenieOutcome> outcomes(cfg.trials);
  parallel_for(cfg.trials, cfg.workers,
               [&](std::uint64_t i) { outcomes[i] = genie_trial(i, cfg, code, ch); });

  ValidationResult result;
  result.trials = cfg.trials;
  std::uint64_t total_tau = 0;
  for (const auto& o : outcomes) {
    if (o.error) ++result.errors;
    if (o.record.censored) ++result.censored;
    total_tau += static_cast<std::uint64_t>(o.record.tau);
  }
  const double count = static_cast<double>(cfg.trials);
  const double eps = code.error_threshold;
  result.error_rate = static_cast<double>(result.errors) / count;
  result.mean_tau = static_cast<double>(total_tau) / count;
  result.standard_error = std::sqrt(eps * (1.0 - eps) / count);
  result.threshold = eps + 3.0 * result.standard_error;
  result.pass = result.error_rate <= result.threshold;
  return result;
}

}  // namespace vlsf
