#include "vlsf/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "vlsf/baseline.hpp"
#include "vlsf/v2sampler.hpp"

#ifndef VLSF_VERSION
#define VLSF_VERSION "0.0.0"
#endif

namespace vlsf {

using nlohmann::ordered_json;

std::string version() { return VLSF_VERSION; }

CodeSpec RunSettings::code(std::size_t i) const {
  if (i >= message_counts.size()) throw std::invalid_argument("no message count given");
  return CodeSpec{message_counts[i], eps};
}

std::uint64_t messages_from_bits(int bits) {
  if (bits < 0 || bits > 63) throw std::invalid_argument("payload bits must lie in [0, 63]");
  return std::uint64_t{1} << bits;
}

double snr_from_db(double db) { return std::pow(10.0, db / 10.0); }

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  T value{};
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty()) {
    throw std::invalid_argument("bad value for " + key + ": '" + text + "'");
  }
  return value;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(key, item));
  if (out.empty()) throw std::invalid_argument(key + " needs at least one value");
  return out;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

void apply_setting(RunSettings& s, const std::string& key, const std::string& value) {
  if (key == "snr") {
    s.channel.snr = parse_number<double>(key, value);
  } else if (key == "snr_db") {
    s.channel.snr = snr_from_db(parse_number<double>(key, value));
  } else if (key == "eps") {
    s.eps = parse_number<double>(key, value);
  } else if (key == "messages") {
    s.message_counts = parse_list<std::uint64_t>(key, value);
  } else if (key == "payload_bits") {
    s.message_counts.clear();
    for (int bits : parse_list<int>(key, value)) s.message_counts.push_back(messages_from_bits(bits));
  } else if (key == "trials") {
    s.sim.trials = parse_number<std::uint64_t>(key, value);
  } else if (key == "n_max") {
    s.sim.n_max = parse_number<int>(key, value);
  } else if (key == "seed") {
    s.sim.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "check_stride") {
    s.sim.check_stride = parse_number<int>(key, value);
  } else if (key == "rule") {
    s.sim.rule = parse_rule(trim(value));
  } else if (key == "tol") {
    s.sim.tol = parse_number<double>(key, value);
  } else if (key == "censor_limit") {
    s.sim.censor_limit = parse_number<double>(key, value);
  } else if (key == "workers") {
    s.sim.workers = parse_number<unsigned>(key, value);
  } else {
    throw std::invalid_argument("unknown setting '" + key + "'");
  }
}

std::map<std::string, std::string> parse_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected key=value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  return parse_config(in);
}

ordered_json settings_to_json(const RunSettings& s) {
  ordered_json j;
  j["snr"] = s.channel.snr;
  j["eps"] = s.eps;
  j["messages"] = s.message_counts;
  j["trials"] = s.sim.trials;
  j["n_max"] = s.sim.n_max;
  j["seed"] = s.sim.seed;
  j["check_stride"] = s.sim.check_stride;
  j["rule"] = to_string(s.sim.rule);
  j["tol"] = s.sim.tol;
  j["censor_limit"] = s.sim.censor_limit;
  return j;
}

RunSettings settings_from_json(const nlohmann::json& j) {
  RunSettings s;
  try {
    s.channel.snr = j.at("snr").get<double>();
    s.eps = j.at("eps").get<double>();
    s.message_counts = j.at("messages").get<std::vector<std::uint64_t>>();
    s.sim.trials = j.at("trials").get<std::uint64_t>();
    s.sim.n_max = j.at("n_max").get<int>();
    s.sim.seed = j.at("seed").get<std::uint64_t>();
    s.sim.check_stride = j.at("check_stride").get<int>();
    s.sim.rule = parse_rule(j.at("rule").get<std::string>());
    s.sim.tol = j.at("tol").get<double>();
    s.sim.censor_limit = j.at("censor_limit").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed manifest config: ") + e.what());
  }
  return s;
}

ordered_json result_to_json(const BoundResult& r, const RunSettings& s) {
  ordered_json j;
  const CodeSpec code{r.message_count, s.eps};
  j["M"] = r.message_count;
  j["log2M"] = code.payload_bits();
  j["trials"] = r.trials;
  j["n_max"] = r.n_max;
  j["mean_tau"] = r.mean_tau;
  j["ci"] = r.ci_halfwidth;
  j["rate"] = r.rate ? ordered_json(*r.rate) : ordered_json(nullptr);
  j["censored"] = r.censored;
  j["censored_fraction"] = r.censored_fraction;
  j["capacity"] = capacity(s.channel);
  if (r.mean_tau >= 1.0) {
    const BaselinePoint na = normal_approx(r.mean_tau, s.channel, s.eps);
    j["normal_approx"] = na.rate;
    j["normal_approx_floored"] = na.floored;
  } else {
    j["normal_approx"] = nullptr;
    j["normal_approx_floored"] = false;
  }
  ordered_json pmf = ordered_json::array();
  for (const auto& [tau, count] : r.tau_counts) pmf.push_back({tau, count});
  j["pmf"] = std::move(pmf);
  return j;
}

ordered_json validation_to_json(const ValidationResult& r, std::uint64_t message_count) {
  ordered_json j;
  j["M"] = message_count;
  j["trials"] = r.trials;
  j["errors"] = r.errors;
  j["error_rate"] = r.error_rate;
  j["standard_error"] = r.standard_error;
  j["threshold"] = r.threshold;
  j["mean_tau"] = r.mean_tau;
  j["censored"] = r.censored;
  j["pass"] = r.pass;
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json make_manifest(const std::string& command, const RunSettings& s,
                           ordered_json results) {
  ordered_json j;
  j["tool"] = "vlsf";
  j["version"] = version();
  j["command"] = command;
  j["timestamp"] = utc_timestamp();
  j["config"] = settings_to_json(s);
  j["tolerances"] = {{"quadrature", s.sim.tol},
                     {"quantile", kQuantileTolerance},
                     {"censor_limit", s.sim.censor_limit}};
  // A stride above 1 checks the bound less often: still valid, but weaker.
  j["weakened_by_stride"] = s.sim.check_stride > 1;
  j["results"] = std::move(results);
  return j;
}

std::pair<std::string, RunSettings> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open manifest " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("manifest " + path + " is not valid JSON: " + e.what());
  }
  if (!j.contains("config")) throw std::invalid_argument("manifest " + path + " has no config");
  return {j.value("command", std::string()), settings_from_json(j["config"])};
}

std::string sweep_csv(const std::vector<SweepPoint>& points, const RunSettings& s) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  const double c = capacity(s.channel);
  for (const auto& p : points) {
    const double bits = CodeSpec{p.message_count, s.eps}.payload_bits();
    out << p.message_count << ',' << format_double(bits) << ',';
    if (!p.result) {
      std::string reason = p.error;
      std::replace(reason.begin(), reason.end(), ',', ';');
      std::replace(reason.begin(), reason.end(), '\n', ' ');
      out << ",,,," << format_double(c) << ",,,error: " << reason << '\n';
      continue;
    }
    const BoundResult& r = *p.result;
    out << format_double(r.mean_tau) << ',' << format_double(r.ci_halfwidth) << ','
        << (r.rate ? format_double(*r.rate) : std::string()) << ','
        << format_double(r.censored_fraction) << ',' << format_double(c) << ',';
    if (r.mean_tau >= 1.0) {
      const BaselinePoint na = normal_approx(r.mean_tau, s.channel, s.eps);
      out << format_double(na.rate) << ',' << (na.floored ? 1 : 0);
    } else {
      out << ",0";
    }
    out << ",ok\n";
  }
  return out.str();
}

std::string sweep_svg(const std::vector<SweepPoint>& points, const RunSettings& s) {
  struct Pt {
    double n;
    double rate;
  };
  std::vector<Pt> sim;
  for (const auto& p : points) {
    if (p.result && p.result->rate) sim.push_back({p.result->mean_tau, *p.result->rate});
  }
  std::sort(sim.begin(), sim.end(), [](const Pt& a, const Pt& b) { return a.n < b.n; });

  const double c = capacity(s.channel);
  double n_hi = 10.0;
  for (const auto& p : sim) n_hi = std::max(n_hi, p.n);
  n_hi *= 1.1;
  const double rate_hi = c * 1.15;

  const double width = 640, height = 400, left = 60, right = 20, top = 20, bottom = 50;
  auto px = [&](double n) { return left + n / n_hi * (width - left - right); };
  auto py = [&](double r) { return height - bottom - r / rate_hi * (height - top - bottom); };
  auto f = [](double x) { return format_double(std::round(x * 100.0) / 100.0); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << f(py(0)) << "\" x2=\"" << width - right
      << "\" y2=\"" << f(py(0)) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << f(py(0)) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double n = n_hi * i / 5.0;
    const double r = rate_hi * i / 5.0;
    out << "<text x=\"" << f(px(n)) << "\" y=\"" << height - bottom + 18
        << "\" text-anchor=\"middle\">" << format_double(std::round(n)) << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << f(py(r) + 4)
        << "\" text-anchor=\"end\">" << format_double(std::round(r * 1000.0) / 1000.0)
        << "</text>\n";
  }
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\">average blocklength (channel uses)</text>\n";
  out << "<text x=\"15\" y=\"" << (top + height - bottom) / 2 << "\" transform=\"rotate(-90 15 "
      << (top + height - bottom) / 2
      << ")\" text-anchor=\"middle\">rate (bits per channel use)</text>\n";

  out << "<line x1=\"" << left << "\" y1=\"" << f(py(c)) << "\" x2=\"" << width - right
      << "\" y2=\"" << f(py(c)) << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";

  out << "<polyline fill=\"none\" stroke=\"#d62728\" points=\"";
  for (int i = 1; i <= 200; ++i) {
    const double n = 1.0 + (n_hi - 1.0) * i / 200.0;
    out << f(px(n)) << ',' << f(py(normal_approx_rate(n, s.channel, s.eps))) << ' ';
  }
  out << "\"/>\n";

  if (!sim.empty()) {
    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (const auto& p : sim) out << f(px(p.n)) << ',' << f(py(p.rate)) << ' ';
    out << "\"/>\n";
    for (const auto& p : sim) {
      out << "<circle cx=\"" << f(px(p.n)) << "\" cy=\"" << f(py(p.rate))
          << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    }
  }

  const double lx = width - right - 190;
  out << "<text x=\"" << lx << "\" y=\"" << top + 14 << "\" fill=\"gray\">capacity</text>\n";
  out << "<text x=\"" << lx << "\" y=\"" << top + 30
      << "\" fill=\"#d62728\">normal approximation</text>\n";
  out << "<text x=\"" << lx << "\" y=\"" << top + 46
      << "\" fill=\"#1f77b4\">stop-feedback bound</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace vlsf
