#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "vlsf/cli.hpp"

using namespace vlsf;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "vlsf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::string without_timestamp(const std::string& text) {
  return std::regex_replace(text, std::regex("\"timestamp\": \"[^\"]*\""), "\"timestamp\": \"\"");
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("vlsf_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"eval", "--trials", "ten", "--messages", "4"}).code == kExitUsage);
  CHECK(run({"eval", "--snr", "1", "--snr-db", "0", "--messages", "4"}).code == kExitUsage);
  CHECK(run({"eval", "--payload-bits", "3", "--messages", "4"}).code == kExitUsage);
  CHECK(run({"eval", "--trials", "5"}).code == kExitUsage);
  CHECK(run({"eval", "--messages", "4,8"}).code == kExitUsage);
  CHECK(run({"eval", "--messages", "4", "--rule", "v7"}).code == kExitUsage);
  CHECK(run({"eval", "--messages", "4", "--snr", "-1"}).code == kExitUsage);
  CHECK(run({"eval", "--messages", "4", "--config", "/nonexistent.conf"}).code == kExitUsage);
  const Outcome empty = run({"sweep"});
  CHECK(empty.code == kExitUsage);
  CHECK(empty.err.find("at least one") != std::string::npos);
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({"--version"}).out.find("0.") != std::string::npos);
}

TEST_CASE("eval with a single message") {
  const Outcome r = run({"eval", "--payload-bits", "0", "--trials", "10"});
  REQUIRE(r.code == kExitOk);
  const auto end = r.out.rfind("}\n");
  const auto j = nlohmann::json::parse(r.out.substr(0, end + 1));
  CHECK(j["results"][0]["mean_tau"] == 0.0);
  CHECK(j["results"][0]["rate"].is_null());
  CHECK(r.out.find("rate=n/a") != std::string::npos);
}

TEST_CASE("eval output is reproducible and worker-independent") {
  TempDir dir;
  const std::vector<std::string> base = {"eval", "--snr-db", "0", "--eps", "1e-3", "--payload-bits",
                                         "10", "--trials", "60", "--seed", "7"};
  auto with = [&](std::vector<std::string> extra, const std::string& out) {
    std::vector<std::string> args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    args.push_back("--out");
    args.push_back(out);
    return run(args);
  };
  REQUIRE(with({"--workers", "1"}, dir / "a.json").code == kExitOk);
  REQUIRE(with({"--workers", "1"}, dir / "b.json").code == kExitOk);
  REQUIRE(with({"--workers", "3"}, dir / "c.json").code == kExitOk);
  const std::string a = without_timestamp(slurp(dir / "a.json"));
  CHECK(a == without_timestamp(slurp(dir / "b.json")));
  CHECK(a == without_timestamp(slurp(dir / "c.json")));
  const auto j = nlohmann::json::parse(a);
  CHECK(j["config"]["seed"] == 7);
  CHECK(j["results"][0]["M"] == 1024);
  CHECK(j["results"][0]["pmf"].size() > 3);

  // The manifest reruns to the same results, even with other flags absent.
  REQUIRE(run({"eval", "--manifest", dir / "a.json", "--out", dir / "d.json"}).code == kExitOk);
  CHECK(a == without_timestamp(slurp(dir / "d.json")));
  // Explicit flags override the manifest.
  REQUIRE(run({"eval", "--manifest", dir / "a.json", "--seed", "8", "--out", dir / "e.json"}).code ==
          kExitOk);
  CHECK(nlohmann::json::parse(slurp(dir / "e.json"))["config"]["seed"] == 8);
}

TEST_CASE("config file settings") {
  TempDir dir;
  std::ofstream(dir / "run.conf") << "payload_bits = 8\ntrials = 30\nseed = 3\n";
  const Outcome r = run({"eval", "--config", dir / "run.conf", "--trials", "20", "--out", dir / "r.json"});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(slurp(dir / "r.json"));
  CHECK(j["config"]["messages"][0] == 256);
  CHECK(j["config"]["trials"] == 20);
  CHECK(j["config"]["seed"] == 3);
}

TEST_CASE("censoring overflow exits with 2") {
  const Outcome r = run({"eval", "--payload-bits", "10", "--trials", "20", "--n-max", "5"});
  CHECK(r.code == kExitNumerical);
  CHECK(r.err.find("censored") != std::string::npos);
}

TEST_CASE("sweep writes CSV, SVG and manifest; failed points are marked") {
  TempDir dir;
  const Outcome r = run({"sweep", "--payload-bits", "4,8", "--trials", "40", "--out", dir / "s.csv",
                         "--svg", dir / "s.svg", "--json", dir / "s.json"});
  REQUIRE(r.code == kExitOk);
  const std::string csv = slurp(dir / "s.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(slurp(dir / "s.svg").find("<svg") == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "s.json"))["results"].size() == 2);

  const Outcome partial = run({"sweep", "--messages", "1,16", "--trials", "20", "--out", dir / "p.csv"});
  CHECK(partial.code == kExitNumerical);
  const std::string p = slurp(dir / "p.csv");
  CHECK(p.find("error:") != std::string::npos);
  CHECK(p.find(",ok\n") != std::string::npos);
}

TEST_CASE("sweep under KN stops no later than V1 on every row") {
  TempDir dir;
  const std::vector<std::string> common = {"sweep", "--payload-bits", "6,10", "--trials", "25", "--seed", "4"};
  auto args_v1 = common, args_kn = common;
  args_v1.insert(args_v1.end(), {"--rule", "v1", "--json", dir / "v1.json"});
  args_kn.insert(args_kn.end(), {"--rule", "kn", "--json", dir / "kn.json"});
  REQUIRE(run(args_v1).code == kExitOk);
  REQUIRE(run(args_kn).code == kExitOk);
  const auto v1 = nlohmann::json::parse(slurp(dir / "v1.json"))["results"];
  const auto kn = nlohmann::json::parse(slurp(dir / "kn.json"))["results"];
  for (std::size_t i = 0; i < v1.size(); ++i) {
    CHECK(kn[i]["mean_tau"].get<double>() <= v1[i]["mean_tau"].get<double>());
  }
}

TEST_CASE("validate") {
  const Outcome one = run({"validate", "--messages", "1", "--trials", "50"});
  CHECK(one.code == kExitOk);
  CHECK(one.out.find("errors=0/50") != std::string::npos);
  const Outcome genie = run({"validate", "--messages", "100", "--eps", "0.1", "--trials", "400"});
  CHECK(genie.code == kExitOk);
  CHECK(genie.out.find("PASS") != std::string::npos);
  CHECK(run({"validate", "--messages", "20000", "--eps", "0.1", "--trials", "2"}).code == kExitUsage);
  // One channel use is far too short for eps = 0.01.
  const Outcome fail = run({"validate", "--messages", "100", "--eps", "0.01", "--trials", "300",
                            "--n-max", "1", "--censor-limit", "1"});
  CHECK(fail.code == kExitValidation);
  CHECK(fail.out.find("FAIL") != std::string::npos);
}

}
