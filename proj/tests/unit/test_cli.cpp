#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "fibermem/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kGolden = FIBERMEM_GOLDEN_DIR;
const fs::path kRoot = FIBERMEM_SOURCE_DIR;

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fibermem");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = fibermem::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fibermem_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

// Golden cases: name and arguments. Regenerate with tools/regen_golden.sh.
const std::vector<std::pair<std::string, std::vector<std::string>>> kGoldenCases = {
    {"ringdown", {"--trials", "3000", "--seed", "5", "ringdown"}},
    {"delay_scan", {"--trials", "2000", "--seed", "5", "delay-scan", "--from", "-24", "--to", "24", "--steps", "13"}},
    {"power_scan", {"--trials", "2000", "--seed", "5", "power-scan", "--from", "0", "--to", "4", "--steps", "9"}},
    {"spl", {"--trials", "5000", "--seed", "5", "spl"}},
    {"multiplex", {"multiplex"}},
    {"fidelity", {"fidelity"}},
};

}  // namespace

TEST_CASE("subcommand output matches golden files byte for byte") {
  for (const auto& [name, args] : kGoldenCases) {
    CAPTURE(name);
    const fs::path csv = scratch(name + ".csv");
    std::vector<std::string> full = args;
    full.insert(full.begin(), {"--out", csv.string()});
    const Invocation r = invoke(full);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(slurp(csv) == slurp(kGolden / (name + ".csv")));
    fs::path summary = csv;
    summary.replace_extension(".json");
    CHECK(slurp(summary) == slurp(kGolden / (name + ".json")));
  }
}

TEST_CASE("fixed seed gives identical output across runs and worker counts") {
  const fs::path a = scratch("det_a.csv"), b = scratch("det_b.csv");
  REQUIRE(invoke({"--trials", "4000", "--seed", "9", "--workers", "1", "--out", a.string(), "ringdown"}).code == 0);
  REQUIRE(invoke({"--trials", "4000", "--seed", "9", "--workers", "8", "--out", b.string(), "ringdown"}).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).rfind("bin,counts_fast,counts_slow\n", 0) == 0);
}

TEST_CASE("out writes a json summary next to the csv") {
  const fs::path csv = scratch("mux.csv");
  const Invocation r = invoke({"--out", csv.string(), "multiplex", "--bins", "1"});
  REQUIRE(r.code == 0);
  const json j = json::parse(slurp(scratch("mux.json")));
  CHECK(j.at("p_out").get<double>() == j.at("p_out_single_bin").get<double>());
  CHECK(j.at("p_out").get<double>() == doctest::Approx(0.05 * 0.73));
  CHECK(json::parse(r.out) == j);
}

TEST_CASE("fidelity of identical spectra") {
  const fs::path in = scratch("spectrum.csv");
  {
    std::ofstream f(in);
    f << "wavelength_nm,intensity\n";
    for (int i = 0; i < 41; ++i) f << 900 + 0.1 * i << ',' << std::exp(-0.5 * std::pow((i - 20) / 5.0, 2)) << '\n';
  }
  const Invocation r = invoke({"fidelity", "--input", in.string(), "--output", in.string()});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("fidelity").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  const Invocation sim = invoke({"fidelity"});
  CHECK(json::parse(sim.out).at("fidelity").get<double>() > 0.9997);
}

TEST_CASE("spl summary fields") {
  const Invocation r = invoke({"--trials", "20000", "spl"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  for (const char* k : {"eta_w", "eta_r", "eta_tot", "snr", "mu1", "n_noise", "lifetime", "ci95", "uncertainties"})
    CHECK_MESSAGE(j.contains(k), k);
  CHECK(j.at("eta_tot").get<double>() == doctest::Approx(0.73).epsilon(0.05));
}

TEST_CASE("ringdown on the default config recovers the 16 round-trip lifetime") {
  const Invocation r = invoke({"--trials", "100000", "ringdown"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("configured_lifetime").get<double>() == doctest::Approx(16.0));
  CHECK(j.at("lifetime").get<double>() == doctest::Approx(16.0).epsilon(0.05));
}

TEST_CASE("exit codes") {
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
  CHECK(invoke({"delay-scan", "--from", "0"}).code == 1);
  CHECK(invoke({"--config", "/nonexistent/cfg.json", "ringdown"}).code == 1);
  CHECK(invoke({"--help"}).code == 0);

  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << R"({"cavity": {"colour": 3}})";
  const Invocation b = invoke({"--config", bad.string(), "ringdown"});
  CHECK(b.code == 1);
  CHECK(b.err.find("cavity.colour") != std::string::npos);

  // Lossless, perfectly reflecting cavity: nothing leaks, so there is no ring-down to fit.
  const fs::path closed = scratch("closed.json");
  std::ofstream(closed) << R"({"cavity": {"reflectivity": 1.0, "loss_db_per_km": 0.0}, "run": {"trials": 200}})";
  const Invocation c = invoke({"--config", closed.string(), "ringdown"});
  CHECK(c.code == 2);
  CHECK(c.err.find("fit_ring_down") != std::string::npos);

  CHECK(invoke({"--trials", "200", "power-scan", "--from", "0", "--to", "1", "--steps", "2"}).code == 2);
  CHECK(invoke({"fidelity", "--input", "/nonexistent.csv"}).code == 1);
}
