#include "vlsf/cli.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "vlsf/baseline.hpp"
#include "vlsf/engine.hpp"
#include "vlsf/io.hpp"

namespace vlsf {

namespace {

// Flags that map onto RunSettings keys, in the order they are applied.
const std::vector<std::pair<std::string, std::string>> kSettingFlags = {
    {"--snr", "snr"},
    {"--snr-db", "snr_db"},
    {"--eps", "eps"},
    {"--messages", "messages"},
    {"--payload-bits", "payload_bits"},
    {"--trials", "trials"},
    {"--n-max", "n_max"},
    {"--seed", "seed"},
    {"--stride", "check_stride"},
    {"--rule", "rule"},
    {"--tol", "tol"},
    {"--censor-limit", "censor_limit"},
    {"--workers", "workers"},
};

struct CommandArgs {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> raw;
  std::string config_path;
  std::string manifest_path;
  std::string out_path;
  std::string svg_path;
  std::string json_path;
};

void add_common(CommandArgs& a) {
  CLI::App& app = *a.app;
  auto* snr = app.add_option("--snr", a.raw["snr"], "SNR, linear");
  app.add_option("--snr-db", a.raw["snr_db"], "SNR in dB")->excludes(snr);
  app.add_option("--eps", a.raw["eps"], "target average error probability");
  auto* messages =
      app.add_option("--messages", a.raw["messages"], "number of messages M (comma-separated)");
  app.add_option("--payload-bits", a.raw["payload_bits"], "payload bits k, M = 2^k (comma-separated)")
      ->excludes(messages);
  app.add_option("--trials", a.raw["trials"], "Monte Carlo trials per point");
  app.add_option("--n-max", a.raw["n_max"], "censoring horizon in channel uses (0: 8 max(log2 M, log2 1/eps) / C)");
  app.add_option("--seed", a.raw["seed"], "64-bit seed");
  app.add_option("--stride", a.raw["check_stride"], "evaluate the bound every this many symbols");
  app.add_option("--rule", a.raw["rule"], "stopping statistic: v1 or kn");
  app.add_option("--tol", a.raw["tol"], "relative quadrature tolerance");
  app.add_option("--censor-limit", a.raw["censor_limit"], "largest tolerated censored fraction");
  app.add_option("--workers", a.raw["workers"], "worker threads (0: all cores)");
  app.add_option("--config", a.config_path, "key=value settings file");
  app.add_option("--manifest", a.manifest_path, "rerun the settings recorded in a manifest");
}

// defaults < config file < manifest < explicit flags
RunSettings resolve_settings(const CommandArgs& a) {
  RunSettings s;
  if (!a.config_path.empty()) {
    for (const auto& [key, value] : read_config_file(a.config_path)) apply_setting(s, key, value);
  }
  if (!a.manifest_path.empty()) {
    const unsigned workers = s.sim.workers;
    s = read_manifest(a.manifest_path).second;
    s.sim.workers = workers;
  }
  for (const auto& [flag, key] : kSettingFlags) {
    if (a.app->count(flag) > 0) apply_setting(s, key, a.raw.at(key));
  }
  s.channel.validate();
  s.sim.validate();
  if (!(s.eps >= 0.0 && s.eps <= 1.0)) throw std::invalid_argument("eps must lie in [0, 1]");
  return s;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("write to " + path + " failed");
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string summary(const BoundResult& r, const RunSettings& s) {
  std::ostringstream line;
  line << "M=" << r.message_count << " mean_tau=" << fixed(r.mean_tau, 3) << " +/- "
       << fixed(r.ci_halfwidth, 3) << " rate=" << (r.rate ? fixed(*r.rate, 4) : "n/a")
       << " bits/use capacity=" << fixed(capacity(s.channel), 4);
  if (r.mean_tau >= 1.0) {
    line << " normal_approx=" << fixed(normal_approx_rate(r.mean_tau, s.channel, s.eps), 4);
  }
  line << " censored=" << r.censored << "/" << r.trials << " rule=" << to_string(s.sim.rule);
  return line.str();
}

int cmd_eval(const CommandArgs& a, std::ostream& out) {
  RunSettings s = resolve_settings(a);
  if (s.message_counts.size() != 1) {
    throw std::invalid_argument("eval needs exactly one message count (--messages or --payload-bits)");
  }
  const BoundResult r = estimate_bound(s.sim, s.code(), s.channel);
  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  results.push_back(result_to_json(r, s));
  const std::string doc = make_manifest("eval", s, std::move(results)).dump(2) + "\n";
  if (a.out_path.empty()) {
    out << doc;
  } else {
    write_file(a.out_path, doc);
  }
  out << summary(r, s) << "\n";
  return kExitOk;
}

int cmd_sweep(const CommandArgs& a, std::ostream& out, std::ostream& err) {
  RunSettings s = resolve_settings(a);
  if (s.message_counts.empty()) {
    throw std::invalid_argument("sweep needs at least one message count (--messages or --payload-bits)");
  }
  const auto points = run_sweep(s.message_counts, s.sim, s.eps, s.channel);
  const std::string csv = sweep_csv(points, s);
  // Summaries go to err when the CSV itself occupies out.
  std::ostream& log = a.out_path.empty() ? err : out;
  if (a.out_path.empty()) {
    out << csv;
  } else {
    write_file(a.out_path, csv);
  }
  if (!a.svg_path.empty()) write_file(a.svg_path, sweep_svg(points, s));

  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  bool failed = false;
  for (const auto& p : points) {
    if (p.result) {
      results.push_back(result_to_json(*p.result, s));
      log << summary(*p.result, s) << "\n";
    } else {
      failed = true;
      results.push_back({{"M", p.message_count}, {"error", p.error}});
      log << "M=" << p.message_count << " failed: " << p.error << "\n";
    }
  }
  if (!a.json_path.empty()) {
    write_file(a.json_path, make_manifest("sweep", s, std::move(results)).dump(2) + "\n");
  }
  return failed ? kExitNumerical : kExitOk;
}

int cmd_validate(const CommandArgs& a, std::ostream& out) {
  RunSettings s = resolve_settings(a);
  if (s.message_counts.size() != 1) {
    throw std::invalid_argument("validate needs exactly one message count (--messages or --payload-bits)");
  }
  const CodeSpec code = s.code();
  const ValidationResult r = validate_genie(s.sim, code, s.channel);
  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  results.push_back(validation_to_json(r, code.message_count));
  const std::string doc = make_manifest("validate", s, std::move(results)).dump(2) + "\n";
  if (a.out_path.empty()) {
    out << doc;
  } else {
    write_file(a.out_path, doc);
  }
  out << (r.pass ? "PASS" : "FAIL") << " M=" << code.message_count << " errors=" << r.errors << "/"
      << r.trials << " rate=" << fixed(r.error_rate, 6) << " threshold=" << fixed(r.threshold, 6)
      << " (eps " << s.eps << " + 3 se) mean_tau=" << fixed(r.mean_tau, 3) << "\n";
  return r.pass ? kExitOk : kExitValidation;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stop-feedback achievability bound for the Gaussian channel", "vlsf"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  CommandArgs eval, sweep, validate;
  eval.app = app.add_subcommand("eval", "estimate E[tau] and the rate at one message count");
  sweep.app = app.add_subcommand("sweep", "estimate over several message counts, write CSV");
  validate.app = app.add_subcommand("validate", "explicit-codebook check of the error probability");
  for (CommandArgs* a : {&eval, &sweep, &validate}) {
    add_common(*a);
    a->app->add_option("--out", a->out_path, "output file (default: standard output)");
  }
  sweep.app->add_option("--svg", sweep.svg_path, "write an SVG chart of rate vs blocklength");
  sweep.app->add_option("--json", sweep.json_path, "write the run manifest as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream cli_out, cli_err;
    const int code = app.exit(e, cli_out, cli_err);
    out << cli_out.str();
    err << cli_err.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*eval.app) return cmd_eval(eval, out);
    if (*sweep.app) return cmd_sweep(sweep, out, err);
    return cmd_validate(validate, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace vlsf
