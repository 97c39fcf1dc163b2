#include <doctest.h>

#include <cmath>
#include <tuple>
#include <vector>

#include <boost/math/distributions/gamma.hpp>

#include "support.hpp"
#include "vlsf/engine.hpp"

using namespace vlsf;

namespace {

SimConfig quick(std::uint64_t trials, std::uint64_t seed = 1) {
  SimConfig cfg;
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.workers = 1;
  return cfg;
}

bool same(const BoundResult& a, const BoundResult& b) {
  return a.message_count == b.message_count && a.trials == b.trials && a.n_max == b.n_max &&
         a.mean_tau == b.mean_tau && a.ci_halfwidth == b.ci_halfwidth && a.rate == b.rate &&
         a.tau_counts == b.tau_counts && a.censored == b.censored &&
         a.censored_fraction == b.censored_fraction;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("sufficient statistics follow their gamma laws") {
  for (double snr : {1.0, 4.0}) {
    const ChannelParams ch{snr};
    const SimConfig cfg = quick(1, 17);
    for (int n : {1, 10, 50}) {
      std::vector<double> v1, lam;
      for (std::uint64_t t = 0; t < 10000; ++t) {
        const TrialState st = simulate_statistics(t, n, cfg, ch);
        v1.push_back(st.v1);
        lam.push_back(st.lam);
      }
      const boost::math::gamma_distribution<> v1_law(0.5 * n, 2.0 / snr);
      const boost::math::gamma_distribution<> lam_law(0.5 * n, 2.0 * (1.0 + 1.0 / snr));
      const double p1 = oracle::ks_pvalue(v1, [&](double x) { return boost::math::cdf(v1_law, x); });
      const double p2 = oracle::ks_pvalue(lam, [&](double x) { return boost::math::cdf(lam_law, x); });
      CAPTURE(snr);
      CAPTURE(n);
      CHECK(p1 > 0.01);
      CHECK(p2 > 0.01);
    }
  }
}

TEST_CASE("zero-length trials") {
  const ChannelParams ch{1.0};
  const TrialRecord one = run_trial(0, quick(1), {1, 1e-3}, ch);
  CHECK(one.tau == 0);
  CHECK_FALSE(one.censored);
  const TrialRecord sure = run_trial(0, quick(1), {2, 1.0}, ch);
  CHECK(sure.tau == 0);
  const BoundResult r = estimate_bound(quick(20), {1, 1e-3}, ch);
  CHECK(r.mean_tau == 0.0);
  CHECK_FALSE(r.rate.has_value());
}

TEST_CASE("aggregation") {
  std::vector<TrialRecord> records(10);
  for (auto& r : records) r.tau = 7;
  const BoundResult point = summarize_trials(records, {2, 1e-3}, 100);
  CHECK(point.mean_tau == 7.0);
  CHECK(point.ci_halfwidth == 0.0);
  CHECK(point.pmf(7) == 1.0);
  CHECK(point.pmf(6) == 0.0);
  CHECK(*point.rate == doctest::Approx(1.0 / 7.0));

  records[0].tau = 3;
  records[1].tau = 11;
  records[1].censored = true;
  const BoundResult spread = summarize_trials(records, {1024, 1e-3}, 11);
  CHECK(spread.mean_tau == 7.0);
  CHECK(spread.ci_halfwidth > 0.0);
  CHECK(spread.censored == 1);
  CHECK(spread.censored_fraction == doctest::Approx(0.1));
  double total = 0.0;
  for (const auto& [tau, count] : spread.tau_counts) total += spread.pmf(tau);
  CHECK(total == doctest::Approx(1.0));
  CHECK(*spread.rate == doctest::Approx(10.0 / 7.0));
}

TEST_CASE("results do not depend on the worker count") {
  const CodeSpec code{1 << 10, 1e-3};
  const ChannelParams ch{1.0};
  SimConfig cfg = quick(120, 99);
  const BoundResult one = estimate_bound(cfg, code, ch);
  cfg.workers = 4;
  const BoundResult four = estimate_bound(cfg, code, ch);
  CHECK(same(one, four));
  cfg.rule = StoppingRule::kn;
  cfg.trials = 30;
  const BoundResult kn4 = estimate_bound(cfg, code, ch);
  cfg.workers = 1;
  CHECK(same(kn4, estimate_bound(cfg, code, ch)));
}

TEST_CASE("paired trials: KN stops no later, wider strides no earlier") {
  const CodeSpec code{1 << 10, 1e-3};
  const ChannelParams ch{1.0};
  SimConfig v1 = quick(1, 5);
  SimConfig kn = v1;
  kn.rule = StoppingRule::kn;
  SimConfig wide = v1;
  wide.check_stride = 4;
  int strictly_earlier = 0;
  for (std::uint64_t t = 0; t < 60; ++t) {
    const int tau_v1 = run_trial(t, v1, code, ch).tau;
    const int tau_kn = run_trial(t, kn, code, ch).tau;
    CHECK(tau_kn <= tau_v1);
    if (tau_kn < tau_v1) ++strictly_earlier;
    const TrialRecord w = run_trial(t, wide, code, ch);
    CHECK(w.tau >= tau_v1);
    CHECK(w.tau % 4 == 0);
  }
  MESSAGE("KN stopped strictly earlier in " << strictly_earlier << " of 60 trials");
}

TEST_CASE("censoring") {
  const CodeSpec code{1 << 10, 1e-3};
  const ChannelParams ch{1.0};
  SimConfig cfg = quick(20);
  cfg.n_max = 5;
  CHECK_THROWS_AS(estimate_bound(cfg, code, ch), CensoringError);
  cfg.censor_limit = 1.0;
  const BoundResult r = estimate_bound(cfg, code, ch);
  CHECK(r.censored == 20);
  CHECK(r.mean_tau == 5.0);
  CHECK(default_n_max(code, ch) == 160);
  CHECK(default_n_max({2, 1e-3}, ch) == 160);
  CHECK(default_n_max({std::uint64_t{1} << 30, 1e-3}, ch) == 480);
  CHECK(resolve_n_max(cfg, code, ch) == 5);
}

TEST_CASE("rate stays below capacity") {
  const BoundResult r = estimate_bound(quick(300, 2), {std::uint64_t{1} << 20, 1e-3}, ChannelParams{1.0});
  CHECK(r.mean_tau > 40.0);
  CHECK(*r.rate < 0.5);
}

TEST_CASE("sweeps") {
  const ChannelParams ch{1.0};
  const auto points = run_sweep({1024, 2, 1024, 1}, quick(40), 1e-3, ch);
  REQUIRE(points.size() == 4);
  REQUIRE(points[0].result);
  REQUIRE(points[1].result);
  REQUIRE(points[2].result);
  CHECK(same(*points[0].result, *points[2].result));
  CHECK(*points[1].result->rate == doctest::Approx(1.0 / points[1].result->mean_tau));
  CHECK_FALSE(points[3].result);
  CHECK_FALSE(points[3].error.empty());
  CHECK_THROWS_AS(run_sweep({}, quick(10), 1e-3, ch), std::invalid_argument);
}

TEST_CASE("genie decoder") {
  for (const auto& [eps, m, snr] : {std::tuple{0.1, 100ull, 1.0}, std::tuple{0.05, 32ull, 2.0}}) {
    const ValidationResult r = validate_genie(quick(3000, 8), {m, eps}, ChannelParams{snr});
    CAPTURE(m);
    CHECK(r.pass);
    CHECK(r.error_rate <= r.threshold);
    CHECK(r.threshold == doctest::Approx(eps + 3.0 * std::sqrt(eps * (1 - eps) / 3000.0)));
  }
  const ValidationResult single = validate_genie(quick(50), {1, 1e-3}, ChannelParams{1.0});
  CHECK(single.errors == 0);
  CHECK(single.mean_tau == 0.0);
  // Near-noiseless: stops after a symbol or two and still meets eps, but a
  // competitor landing within the noise of the sent symbol is not ruled out.
  const ValidationResult clean = validate_genie(quick(10000), {2, 1e-3}, ChannelParams{1e6});
  CHECK(clean.pass);
  CHECK(clean.mean_tau <= 2.0);
  SimConfig kn = quick(500, 4);
  kn.rule = StoppingRule::kn;
  CHECK(validate_genie(kn, {100, 0.1}, ChannelParams{1.0}).pass);
  CHECK_THROWS_AS(genie_trial(0, quick(1), {kMaxGenieMessages + 1, 0.1}, ChannelParams{1.0}),
                  std::invalid_argument);
}

TEST_CASE("configuration checks") {
  SimConfig cfg;
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SimConfig{};
  cfg.check_stride = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(parse_rule("KN") == StoppingRule::kn);
  CHECK(to_string(StoppingRule::v1) == "v1");
  CHECK_THROWS_AS(parse_rule("v3"), std::invalid_argument);
}

}
