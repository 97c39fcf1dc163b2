#pragma once

// Run settings, the JSON run manifest, the sweep CSV and the SVG chart.
//
// A manifest carries every setting that influences results, so feeding it
// back through --manifest reproduces them bit for bit. The worker count is
// left out on purpose: results do not depend on it.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vlsf/bound.hpp"
#include "vlsf/engine.hpp"

namespace vlsf {

struct RunSettings {
  ChannelParams channel;
  double eps = 1e-3;
  std::vector<std::uint64_t> message_counts;
  SimConfig sim;

  CodeSpec code(std::size_t i = 0) const;
};

/// M = 2^k; k must be in [0, 63].
std::uint64_t messages_from_bits(int bits);

double snr_from_db(double db);

/// Applies one key=value setting. Keys: snr, snr_db, eps, messages,
/// payload_bits (comma-separated lists allowed), trials, n_max, seed,
/// check_stride, rule, tol, censor_limit, workers.
void apply_setting(RunSettings& s, const std::string& key, const std::string& value);

/// Flat UTF-8 key=value file; '#' starts a comment, blank lines are skipped.
std::map<std::string, std::string> parse_config(std::istream& in);
std::map<std::string, std::string> read_config_file(const std::string& path);

nlohmann::ordered_json settings_to_json(const RunSettings& s);
RunSettings settings_from_json(const nlohmann::json& j);

nlohmann::ordered_json result_to_json(const BoundResult& r, const RunSettings& s);
nlohmann::ordered_json validation_to_json(const ValidationResult& r, std::uint64_t message_count);

/// Full manifest: tool, version, command, timestamp, config, tolerances, results.
nlohmann::ordered_json make_manifest(const std::string& command, const RunSettings& s,
                                     nlohmann::ordered_json results);

/// Reads a manifest back; returns its command and settings.
std::pair<std::string, RunSettings> read_manifest(const std::string& path);

/// ISO 8601 UTC, second resolution.
std::string utc_timestamp();

inline constexpr const char* kCsvHeader =
    "M,log2M,mean_tau,ci,rate,censored_fraction,capacity,normal_approx,normal_approx_floored,"
    "status";

std::string sweep_csv(const std::vector<SweepPoint>& points, const RunSettings& s);

/// Rate against mean blocklength: simulated points, capacity, and the normal
/// approximation over the plotted range.
std::string sweep_svg(const std::vector<SweepPoint>& points, const RunSettings& s);

std::string version();

}  // namespace vlsf
