#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "zfluct/report.hpp"

using namespace zfluct;
using namespace zfluct::report;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "zfluct_report_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig two_term_config() {
  ExperimentConfig cfg;
  cfg.family = "two_term";
  cfg.family_params = {{"n", 0.0}, {"m", 1.0}, {"a_n", 1.0}, {"a_m", 1.0}};
  cfg.r_grid = {0.5, 1.0, 2.0};
  return cfg;
}

}  // namespace

TEST_CASE("config parsing") {
  auto dir = scratch_dir("config");
  auto path = (dir / "exp.cfg").string();
  {
    std::ofstream out(path);
    out << "# comment\n"
        << "family = exp\n"
        << "r_grid = 1.0 2.0\n"
        << "tol = 1e-8\n"
        << "[var-mc]\n"
        << "samples = 500\n"
        << "seed = 7\n";
  }
  auto base = load_config(path, "var-exact");
  REQUIRE(base.family == "exp");
  REQUIRE(base.r_grid == std::vector<double>{1.0, 2.0});
  REQUIRE(base.tol == 1e-8);
  REQUIRE_FALSE(base.seed.has_value());

  auto mc = load_config(path, "var-mc");
  REQUIRE(mc.samples == 500);
  REQUIRE(mc.seed.has_value());
  REQUIRE(*mc.seed == 7);

  SECTION("t_grid converts to radii") {
    std::ofstream(path) << "family = exp\nt_grid = 0 2\n";
    auto cfg = load_config(path, "mean");
    REQUIRE(cfg.r_grid.size() == 2);
    REQUIRE(cfg.r_grid[0] == Catch::Approx(1.0));
    REQUIRE(cfg.r_grid[1] == Catch::Approx(std::exp(1.0)));
  }
  SECTION("unknown keys are rejected") {
    std::ofstream(path) << "famly = exp\n";
    REQUIRE_THROWS_AS(load_config(path, "mean"), usage_error);
  }
}

TEST_CASE("csv round trip preserves row values exactly") {
  ResultRow row;
  row.t = 1.234567890123456789;
  row.r = std::exp(0.5 * row.t);
  row.mean_exact = 22.43767313019391;
  row.var_exact = 0.16;
  row.j1 = std::nullopt;
  row.flags = "demo";
  std::istringstream in("#schema=1\n" + std::string(kCsvHeader) + "\n" + to_csv_line(row) +
                        "\n");
  auto rows = parse_csv(in);
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].t == row.t);
  REQUIRE(rows[0].r == row.r);
  REQUIRE(rows[0].mean_exact == row.mean_exact);
  REQUIRE(rows[0].var_exact == row.var_exact);
  REQUIRE_FALSE(rows[0].j1.has_value());
  REQUIRE(rows[0].flags == "demo");
}

TEST_CASE("var-exact over the two-term grid reproduces b(r^2)") {
  auto dir = scratch_dir("var_exact");
  auto result = run("var-exact", two_term_config(), dir);
  REQUIRE(result.exit_code == 0);
  REQUIRE(fs::exists(dir / "var-exact.csv"));
  REQUIRE(fs::exists(dir / "var-exact_manifest.json"));
  std::ifstream in(dir / "var-exact.csv");
  auto rows = parse_csv(in);
  REQUIRE(rows.size() == 3);
  REQUIRE(*rows[0].var_exact == Catch::Approx(0.16).margin(1e-10));
  REQUIRE(*rows[1].var_exact == Catch::Approx(0.25).margin(1e-10));
  REQUIRE(*rows[2].var_exact == Catch::Approx(0.16).margin(1e-10));
  REQUIRE_FALSE(rows[0].mc_mean.has_value());  // absent measurements stay null
}

TEST_CASE("validation failures") {
  auto dir = scratch_dir("validation");
  auto cfg = two_term_config();
  SECTION("empty grid") {
    cfg.r_grid.clear();
    REQUIRE_THROWS_AS(run("sweep", cfg, dir), usage_error);
    REQUIRE_FALSE(fs::exists(dir / "sweep.csv"));
  }
  SECTION("non-increasing grid") {
    cfg.r_grid = {1.0, 0.5};
    REQUIRE_THROWS_AS(run("mean", cfg, dir), usage_error);
  }
  SECTION("mc without seed") {
    cfg.samples = 200;
    REQUIRE_THROWS_AS(run("var-mc", cfg, dir), usage_error);
  }
  SECTION("unknown command") {
    REQUIRE_THROWS_AS(run("frobnicate", cfg, dir), usage_error);
  }
  SECTION("radius beyond the convergence disk") {
    ExperimentConfig disk;
    disk.family = "unit_disk_exp";
    disk.family_params = {{"alpha", 1.0}};
    disk.r_grid = {0.5, 1.5};
    REQUIRE_THROWS_AS(run("mean", disk, dir), model_error);
  }
}

TEST_CASE("var-mc byte determinism across thread counts") {
  auto cfg = two_term_config();
  cfg.r_grid = {1.0};
  cfg.samples = 400;
  cfg.seed = 20240801;

  auto d1 = scratch_dir("mc1");
  auto d2 = scratch_dir("mc2");
  cfg.threads = 1;
  run("var-mc", cfg, d1);
  cfg.threads = 4;
  run("var-mc", cfg, d2);
  REQUIRE(slurp(d1 / "var-mc.csv") == slurp(d2 / "var-mc.csv"));
  REQUIRE_FALSE(slurp(d1 / "var-mc.csv").empty());
}

TEST_CASE("sweep emits plot data") {
  auto dir = scratch_dir("sweep");
  ExperimentConfig cfg;
  cfg.family = "exp";
  cfg.r_grid = {std::exp(1.0), std::exp(1.5)};  // t = 2, 3
  cfg.samples = 0;
  auto result = run("sweep", cfg, dir);
  REQUIRE(fs::exists(dir / "ratio_typeI.dat"));
  std::ifstream in(dir / "ratio_typeI.dat");
  double t, ratio;
  REQUIRE((in >> t >> ratio));
  REQUIRE(t == Catch::Approx(2.0));
  REQUIRE(ratio > 0.5);
  REQUIRE((in >> t >> ratio));
  REQUIRE_FALSE((in >> t));

  auto manifest = slurp(dir / "sweep_manifest.json");
  for (const char* key : {"tol", "tail_eps", "seed", "c_g", "gamma", "samples", "threads"})
    REQUIRE(manifest.find(key) != std::string::npos);
}

TEST_CASE("restricted sweep compares monte carlo variance with its ceiling") {
  auto dir = scratch_dir("restricted_sweep");
  ExperimentConfig cfg;
  cfg.family = "exp";
  cfg.restricted = true;
  cfg.ell_max = 3;
  cfg.r_grid = {std::exp(0.5 * 5.3753)};
  cfg.samples = 1500;
  cfg.seed = 777;
  auto result = run("sweep", cfg, dir);
  REQUIRE(fs::exists(dir / "var_over_b.dat"));
  std::ifstream in(dir / "var_over_b.dat");
  double t, ratio, ceiling;
  REQUIRE((in >> t >> ratio >> ceiling));
  REQUIRE(t == Catch::Approx(5.3753));
  // the lacunary model rides the b(r^2) ceiling, far above the sqrt(b) scale
  REQUIRE(ratio > 1e-2);
  REQUIRE(ratio < 1.0);
  REQUIRE(ceiling == Catch::Approx(216.0).epsilon(0.05));
}

TEST_CASE("restrict command exports a loadable model") {
  auto dir = scratch_dir("restrict");
  ExperimentConfig cfg;
  cfg.family = "exp";
  cfg.ell_max = 3;
  cfg.r_grid = {std::exp(0.5 * 5.3753)};  // interior midpoint of T2
  auto result = run("restrict", cfg, dir);
  REQUIRE(fs::exists(dir / "restricted_coeffs.txt"));
  auto loaded = load_coefficient_file((dir / "restricted_coeffs.txt").string());
  REQUIRE(loaded.support->front() == 64);
  REQUIRE(loaded.support->back() == 4077);
  auto manifest = slurp(dir / "restrict_manifest.json");
  REQUIRE(manifest.find("similarity") != std::string::npos);
}

TEST_CASE("admissible command writes per-condition json") {
  auto dir = scratch_dir("admissible");
  ExperimentConfig cfg;
  cfg.family = "exp";
  cfg.r_grid = {std::exp(3.0)};  // t = 6
  cfg.c_g = 4.0;
  auto result = run("admissible", cfg, dir);
  REQUIRE(result.rows.size() == 1);
  REQUIRE(result.rows[0].flags == "pass");
  auto text = slurp(dir / "admissibility.json");
  REQUIRE(text.find("\"condition\"") != std::string::npos);
  REQUIRE(text.find("\"margin\"") != std::string::npos);
}

TEST_CASE("plot data edge cases") {
  REQUIRE_THROWS_AS(emit_plotdata({}, fs::temp_directory_path()), usage_error);
  auto dir = scratch_dir("plotdata");
  ResultRow row;
  row.t = 2.0;
  row.var_exact = 3.0;
  row.asymptotic = 2.0;
  auto files = emit_plotdata({row}, dir);
  REQUIRE(files.size() == 1);
  auto text = slurp(files[0]);
  REQUIRE(text == "2 1.5\n");
}
