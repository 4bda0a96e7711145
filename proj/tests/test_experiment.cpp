#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dcopt/experiment.hpp"

using namespace dcopt;
namespace fs = std::filesystem;

namespace {

nlohmann::json minimal_config() {
  return nlohmann::json{
      {"schema", 1},
      {"name", "toy"},
      {"seed", 5},
      {"problem", {{"kind", "toy_soft_threshold"}}},
      {"algorithms", {"npdcae_nls"}},
      {"profile", "scad"},
      {"termination", "rel_change"},
      {"tolerances", {1e-8}},
      {"max_iter", 10000},
  };
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("dcopt_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string strip_wall_column(const fs::path& trace_path) {
  std::ifstream in(trace_path);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    auto pos = line.rfind(',');
    out << line.substr(0, pos) << "\n";
  }
  return out.str();
}

}  // namespace

TEST_CASE("a minimal config produces one trace and one report cell") {
  TempDir dir("minimal");
  ExperimentConfig cfg = parse_experiment_config(minimal_config());
  ExperimentResult res = run_experiment(cfg, dir.path.string());
  CHECK(res.exit_code == 0);
  REQUIRE(res.cells.size() == 1);
  CHECK(res.cells[0].status == "converged");
  CHECK(fs::exists(res.trace_paths[0]));
  CHECK(fs::exists(dir.path / "report.json"));

  std::ifstream rep(dir.path / "report.json");
  nlohmann::json j = nlohmann::json::parse(rep);
  CHECK(j["cells"].size() == 1);
}

TEST_CASE("the cell grid covers algorithms times tolerances with no gaps") {
  TempDir dir("grid");
  nlohmann::json j = minimal_config();
  j["algorithms"] = {"npdcae_nls", "dca", "pdcae_adaptive"};
  j["tolerances"] = {1e-4, 1e-6};
  ExperimentConfig cfg = parse_experiment_config(j);
  ExperimentResult res = run_experiment(cfg, dir.path.string(), 2);
  CHECK(res.cells.size() == 6);
  for (const auto& cell : res.cells) CHECK(cell.iterations > 0);
}

TEST_CASE("identical seeds reproduce traces byte-for-byte modulo timing") {
  TempDir a("det_a"), b("det_b");
  nlohmann::json j = minimal_config();
  j["problem"] = {{"kind", "scad"}, {"m", 20}, {"k", 40}, {"sparsity", 5}};
  j["algorithms"] = {"npdcae_nls", "dca"};
  j["tolerances"] = {1e-6};
  ExperimentConfig cfg = parse_experiment_config(j);
  ExperimentResult ra = run_experiment(cfg, a.path.string());
  ExperimentResult rb = run_experiment(cfg, b.path.string());
  REQUIRE(ra.trace_paths.size() == rb.trace_paths.size());
  for (std::size_t i = 0; i < ra.trace_paths.size(); ++i)
    CHECK(strip_wall_column(ra.trace_paths[i]) == strip_wall_column(rb.trace_paths[i]));
  for (std::size_t i = 0; i < ra.cells.size(); ++i)
    CHECK(ra.cells[i].iterations == rb.cells[i].iterations);
}

TEST_CASE("a different seed changes the synthetic instance") {
  TempDir a("seed_a"), b("seed_b");
  nlohmann::json j = minimal_config();
  j["problem"] = {{"kind", "scad"}, {"m", 20}, {"k", 40}, {"sparsity", 5}};
  j["tolerances"] = {1e-6};
  ExperimentConfig cfg = parse_experiment_config(j);
  ExperimentResult ra = run_experiment(cfg, a.path.string());
  ExperimentResult rb = run_experiment(cfg, b.path.string(), 1, 99);
  CHECK(strip_wall_column(ra.trace_paths[0]) != strip_wall_column(rb.trace_paths[0]));
}

TEST_CASE("config validation rejects malformed inputs") {
  CHECK_THROWS_AS(parse_experiment_config(nlohmann::json::array()), ConfigError);

  nlohmann::json no_alg = minimal_config();
  no_alg["algorithms"] = nlohmann::json::array();
  CHECK_THROWS_AS(parse_experiment_config(no_alg), ConfigError);

  nlohmann::json bad_alg = minimal_config();
  bad_alg["algorithms"] = {"npdcae_nlx"};
  CHECK_THROWS_AS(parse_experiment_config(bad_alg), ConfigError);

  nlohmann::json no_tol = minimal_config();
  no_tol["tolerances"] = nlohmann::json::array();
  CHECK_THROWS_AS(parse_experiment_config(no_tol), ConfigError);

  nlohmann::json bad_kind = minimal_config();
  bad_kind["problem"] = {{"kind", "unknown"}};
  ExperimentConfig cfg = parse_experiment_config(bad_kind);
  TempDir dir("badkind");
  CHECK_THROWS_AS(run_experiment(cfg, dir.path.string()), ConfigError);
}

TEST_CASE("rate plots carry finite values until the floor") {
  TempDir dir("rate");
  nlohmann::json j = minimal_config();
  j["rate_plot"] = true;
  j["tolerances"] = {1e-9};
  ExperimentConfig cfg = parse_experiment_config(j);
  ExperimentResult res = run_experiment(cfg, dir.path.string());
  REQUIRE(res.cells[0].status == "converged");

  fs::path rate_path = dir.path / "rate_npdcae_nls_1e-09.csv";
  REQUIRE(fs::exists(rate_path));
  std::ifstream in(rate_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "n,log10_dist,log10_energy_gap,warn");
  std::string line;
  long rows = 0, finite_dist = 0;
  while (std::getline(in, line)) {
    ++rows;
    auto first_comma = line.find(',');
    auto second_comma = line.find(',', first_comma + 1);
    if (second_comma > first_comma + 1) ++finite_dist;
    CHECK(line.back() == '0');  // converged: warn flag off
  }
  CHECK(rows > 0);
  CHECK(finite_dist > 0);
}

TEST_CASE("rate plots from traces without references flag a warning") {
  TraceFile t;
  t.meta.status = "max_iter";
  TraceRow r;
  r.n = 0;
  r.energy = 1.0;
  t.rows.push_back(r);
  std::string csv = rate_plot_csv(t);
  CHECK(csv.find("warn") != std::string::npos);
  CHECK(csv.find(",1\n") != std::string::npos);
}

TEST_CASE("single-row traces emit a single rate row") {
  TraceFile t;
  t.meta.status = "converged";
  TraceRow r;
  r.n = 0;
  r.energy = 1.0;
  r.dist_ref = 0.1;
  t.rows.push_back(r);
  std::string csv = rate_plot_csv(t);
  long newlines = static_cast<long>(std::count(csv.begin(), csv.end(), '\n'));
  CHECK(newlines == 2);  // header + one row
}

TEST_CASE("profiles pin the published parameter sets") {
  LineSearchParams scad = profile_line_search("scad");
  CHECK(scad.lambda_max == 2.0);
  CHECK(scad.max_trials == 3);
  CHECK(scad.rho == 0.3);
  CHECK(scad.omega == 0.9);
  CHECK(scad.eta == 2.9);
  CHECK(scad.min_step == 1e-8);
  LineSearchParams gl = profile_line_search("gl");
  CHECK(gl.omega == 0.001);
  CHECK(gl.eta == 0.3);
  CHECK_THROWS_AS(profile_line_search("bogus"), ConfigError);
}

TEST_CASE("overrides replace profile fields") {
  TempDir dir("override");
  nlohmann::json j = minimal_config();
  j["overrides"] = {{"omega", 0.5}, {"eta", 1.0}, {"b1", 0.01}};
  ExperimentConfig cfg = parse_experiment_config(j);
  ExperimentResult res = run_experiment(cfg, dir.path.string());
  CHECK(res.exit_code == 0);
  CHECK(res.cells[0].status == "converged");
}
