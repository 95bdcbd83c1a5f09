#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int rc = -1;
  std::string out;  // stdout: the run directory
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path root() {
  static const fs::path r = [] {
    const fs::path p = fs::temp_directory_path() / "pekar_test_cli";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return r;
}

Run run(const std::string& cmd, const std::string& config, const std::string& extra = "") {
  const char* exe = std::getenv("PEKAR_CLI");
  REQUIRE_MESSAGE(exe != nullptr, "PEKAR_CLI must point at the CLI binary");
  static int counter = 0;
  const std::string tag = std::to_string(counter++);
  const fs::path cfg = root() / ("cfg" + tag + ".txt");
  std::ofstream(cfg, std::ios::binary) << config;
  const fs::path so = root() / ("out" + tag), se = root() / ("err" + tag);
  const std::string line = std::string("\"") + exe + "\" " + cmd + " --config \"" + cfg.string() + "\" --out \"" +
                           (root() / "runs").string() + "\" --threads 1 " + extra + " >\"" + so.string() +
                           "\" 2>\"" + se.string() + "\"";
  const int status = std::system(line.c_str());
  Run r;
  r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(so);
  while (!r.out.empty() && (r.out.back() == '\n' || r.out.back() == '\r')) r.out.pop_back();
  r.err = slurp(se);
  return r;
}

json load(const Run& r, const std::string& file) { return json::parse(slurp(fs::path(r.out) / file)); }

const std::string kSmallMinimize = "N = 1\nalpha = 1\ngrid_n = 32\nspacing = 1.6\nmax_iters = 400\n";

}  // namespace

TEST_CASE("minimize writes the result schema and is deterministic") {
  const Run a = run("minimize", kSmallMinimize, "--trace");
  REQUIRE(a.rc == 0);
  const json j = load(a, "result.json");
  CHECK(j["converged"] == true);
  for (const char* k : {"kinetic", "external", "coulomb_direct", "coulomb_exchange", "self_interaction", "total"})
    CHECK(j["breakdown"].contains(k));
  CHECK(j["breakdown"].size() == 6);
  CHECK(fs::exists(fs::path(a.out) / "state.ptslt"));
  CHECK(fs::exists(fs::path(a.out) / "trace.csv"));
  CHECK(j["energy"].get<double>() == doctest::Approx(-0.1085128).epsilon(5e-3));

  const std::string first = slurp(fs::path(a.out) / "result.json");
  const std::string state = slurp(fs::path(a.out) / "state.ptslt");
  fs::remove_all(a.out);
  const Run b = run("minimize", kSmallMinimize, "--trace");
  REQUIRE(b.rc == 0);
  CHECK(b.out == a.out);
  CHECK(slurp(fs::path(b.out) / "result.json") == first);
  CHECK(slurp(fs::path(b.out) / "state.ptslt") == state);
}

TEST_CASE("a different seed lands in a different run directory") {
  const std::string cfg = "grid_n = 8\nLambda = 1\nP = 1\n";
  const Run a = run("blocks", cfg, "--seed 3");
  const Run b = run("blocks", cfg, "--seed 4");
  REQUIRE(a.rc == 0);
  REQUIRE(b.rc == 0);
  CHECK(a.out != b.out);
}

TEST_CASE("config errors exit with code 2 and name the key") {
  const Run r = run("minimize", "alpa = 1\n");
  CHECK(r.rc == 2);
  CHECK(r.err.find("alpa") != std::string::npos);
  const Run s = run("minimize", "alpha = -1\n");
  CHECK(s.rc == 2);
  CHECK(s.err.find("alpha") != std::string::npos);
  const Run t = run("bounds", "N = 2\nalpha = 1\n");
  CHECK(t.rc == 2);
  CHECK(t.err.find("'C'") != std::string::npos);
}

TEST_CASE("blocks for the unit ball") {
  const Run r = run("blocks", "Lambda = 1\nP = 1\n");
  REQUIRE(r.rc == 0);
  const std::string csv = slurp(fs::path(r.out) / "blocks.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 28);
  CHECK(csv.find('\r') == std::string::npos);
  const json j = load(r, "blocks.json");
  CHECK(j["count"] == 27);
  CHECK(j["total_weight"].get<double>() == doctest::Approx(4 * 3.141592653589793).epsilon(1e-4));
}

TEST_CASE("localize with one center gives one ball of radius R") {
  const Run r = run("localize", "R = 1.5\ncenters = 0.3, -0.2, 1\nmc_samples = 2000\n");
  REQUIRE(r.rc == 0);
  const json j = load(r, "localize.json");
  REQUIRE(j["cluster"]["radii"].size() == 1);
  CHECK(j["cluster"]["radii"][0].get<double>() == 1.5);
  CHECK(j["cluster"]["occupancies"][0] == 1);
  CHECK(j["cluster"]["invariants_hold"] == true);
}

TEST_CASE("bounds with c = 0 collapse the sandwich") {
  const Run r = run("bounds", "N = 1\nalpha = 100\nc = 0\n");
  REQUIRE(r.rc == 0);
  const json j = load(r, "bounds.json");
  CHECK(j["sandwich"]["lower"] == j["sandwich"]["upper"]);
  CHECK(j["budget_at_optimal_R"]["terms"][0]["alpha_exponent_at_optimal_R"] == "42/23");
  const Run bad = run("bounds", "N = 2\nalpha = 1\nC = -0.3\nnu = 1.5\n");
  CHECK(bad.rc == 1);
  CHECK(bad.err.find("repulsion") != std::string::npos);
}

TEST_CASE("binding scan CSV") {
  const Run r = run("binding", "N = 2\ngrid_n = 16\nspacing = 2.0\nmax_iters = 60\nnu_list = 2, 2.5, 3, 3.5, 4\n");
  REQUIRE(r.rc == 0);
  std::istringstream csv(slurp(fs::path(r.out) / "binding.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "nu,C_1,C_2,gap");
  std::vector<double> nus;
  while (std::getline(csv, line)) {
    std::vector<double> v;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
    REQUIRE(v.size() == 4);
    nus.push_back(v[0]);
    // Only split k = 1 exists for N = 2.
    CHECK(v[3] == doctest::Approx(2 * v[1] - v[2]).epsilon(1e-12));
  }
  REQUIRE(nus.size() == 5);
  for (std::size_t i = 1; i < nus.size(); ++i) CHECK(nus[i] > nus[i - 1]);
}

TEST_CASE("oracle and subadd commands run") {
  const Run o = run("oracle", "electron = chain\nchain_sites = 4\nmax_modes = 2\nn_max_list = 0, 2, 4, 8, 16\n");
  REQUIRE(o.rc == 0);
  const json j = load(o, "oracle.json");
  CHECK(j["records"].size() == 5);
  CHECK(j["monotone_in_n_max"] == true);
  CHECK(j["coherent_dominates"] == true);

  const Run s = run("subadd", "grid_n = 24\nspacing = 0.5\nbig_n = 64\nsupport_radius = 3.5\nshifts = 14, 16, 18\n");
  REQUIRE(s.rc == 0);
  const json k = load(s, "subadd.json");
  CHECK(k["points"].size() == 3);
}

TEST_CASE("unknown subcommand and missing config are rejected") {
  const char* exe = std::getenv("PEKAR_CLI");
  REQUIRE(exe != nullptr);
  CHECK(std::system((std::string("\"") + exe + "\" frobnicate >/dev/null 2>&1").c_str()) != 0);
  CHECK(std::system((std::string("\"") + exe + "\" minimize --config /nonexistent >/dev/null 2>&1").c_str()) != 0);
}
