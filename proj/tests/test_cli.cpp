#include <doctest.h>

#include <boost/math/special_functions/bessel_prime.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dlab/errors.hpp"
#include "dlab/experiments.hpp"

using namespace dlab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("dlab_cli_test_" + tag);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json summary(const fs::path& dir) { return json::parse(slurp(dir / "summary.json")); }

int run_cli(const std::string& args) {
  const int rc = std::system((std::string(DLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

ExperimentConfig small_transition() {
  ExperimentConfig c;
  c.command = "transition";
  c.transition.a_grid = {0.5, 3.0};
  c.transition.trials = 100;
  c.transition.modes = 1000;
  return c;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config round trip") {
    ExperimentConfig d;
    CHECK(ExperimentConfig::parse(d.serialize()) == d);
    ExperimentConfig c;
    c.command = "criteria";
    c.run.seed = 18446744073709551557ull;
    c.run.threads = 4;
    c.run.out = "somewhere/else";
    c.run.formats = {"json"};
    c.model = {"sphere", 2.5, 0.1};
    c.distribution.kind = "bounded_custom";
    c.distribution.table_s = {0.0, 0.3, 1.0 / 3.0};
    c.distribution.table_F = {0.0, 0.25, 1.0};
    c.distribution.phase = 0.7;
    c.criteria.delta_grid = {1e-3, 0.1};
    c.criteria.prefix_drops = {0, 7};
    c.transition.eps = {0.2};
    c.lab.h = 1e-7;
    CHECK(ExperimentConfig::parse(c.serialize()) == c);
  }

  TEST_CASE("config parsing") {
    const auto c = ExperimentConfig::parse(
        "# comment\n[run]\ncommand = disk-spectrum\nseed = 5  # trailing\n[disk]\nmodes = 2\n"
        "[criteria]\ndelta_grid = 0.5, 2\n");
    CHECK(c.command == "disk-spectrum");
    CHECK(c.run.seed == 5);
    CHECK(c.disk.modes == 2);
    CHECK(c.criteria.delta_grid == std::vector<double>{0.5, 2.0});
    CHECK(c.lab.n == 16);
    CHECK_THROWS_AS(ExperimentConfig::parse("[run]\nseeed = 1\n"), InvalidArgument);
    CHECK_THROWS_AS(ExperimentConfig::parse("[nowhere]\n"), InvalidArgument);
    CHECK_THROWS_AS(ExperimentConfig::parse("[lab]\nn = sixteen\n"), InvalidArgument);
    CHECK_THROWS_AS(ExperimentConfig::parse("[lab]\njust text\n"), InvalidArgument);
    CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/dlab.cfg"), InvalidArgument);
  }

  TEST_CASE("config validation") {
    ExperimentConfig c;
    c.lab.n = 3;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = small_transition();
    c.transition.a_grid.clear();
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = small_transition();
    c.transition.trials = 10;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = ExperimentConfig{};
    c.command = "weyl-fit";
    c.weyl.lambda_max = 1e4;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = ExperimentConfig{};
    c.run.formats = {"xml"};
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = ExperimentConfig{};
    c.model.boundary = "torus";
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    CHECK_NOTHROW(ExperimentConfig{}.validate());
  }

  TEST_CASE("lab run writes a verifiable manifest") {
    ExperimentConfig c;
    c.lab.samples = 30;
    const auto dir = fresh_dir("lab");
    const auto m = run_lab(c, dir.string());
    CHECK(m.command == "lab");
    CHECK(m.config_hash == sha256_hex(c.serialize()));
    CHECK(fs::exists(dir / "lab_report.csv"));
    CHECK_FALSE(fs::exists(dir / "failing_case.txt"));
    std::string why;
    CHECK(verify_manifest(dir.string(), &why));
    std::ofstream(dir / "lab_report.csv", std::ios::app) << "tampered\n";
    CHECK_FALSE(verify_manifest(dir.string(), &why));
    CHECK_FALSE(why.empty());
  }

  TEST_CASE("same seed gives identical artifacts") {
    ExperimentConfig c;
    c.command = "disk-spectrum";
    c.distribution.kind = "pareto_imaginary";
    c.distribution.a = 3.0;
    c.distribution.s_min = 0.5;
    c.disk.modes = 3;
    const auto a = run_command(c, fresh_dir("rep_a").string());
    const auto b = run_command(c, fresh_dir("rep_b").string());
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i].sha256 == b.files[i].sha256);
    c.run.seed += 1;
    const auto d = run_command(c, fresh_dir("rep_c").string());
    CHECK(d.files[0].sha256 != a.files[0].sha256);
  }

  TEST_CASE("disk run with zero impedance gives the Neumann table") {
    ExperimentConfig c;
    c.command = "disk-spectrum";
    c.disk.modes = 4;
    const auto dir = fresh_dir("neumann");
    run_disk_spectrum(c, dir.string());
    std::ifstream f(dir / "eigenvalues.csv");
    std::string line;
    std::getline(f, line);
    int rows = 0;
    while (std::getline(f, line)) {
      std::stringstream ss(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      REQUIRE(cells.size() == 9);
      const int k = std::stoi(cells[1]);
      const double lr = std::stod(cells[5]);
      CHECK(std::abs(std::stod(cells[6])) <= 1e-12);
      CHECK(std::abs(boost::math::cyl_bessel_j_prime(k, lr)) <= 1e-9);
      ++rows;
    }
    // J_k' zeros in (1, 10): k=0: 2, k=1: 3, k=2: 3, k=3: 2, k=4: 2; doubled for k >= 1
    CHECK(rows == 2 + 2 * (3 + 3 + 2 + 2));
    const auto js = summary(dir);
    CHECK(js["eigenvalue_count"] == rows);
    CHECK(js["spot_check_max_rel_diff"].get<double>() <= 1e-4);
  }

  TEST_CASE("dissipative impedance pushes eigenvalues below the axis") {
    ExperimentConfig c;
    c.command = "disk-spectrum";
    c.distribution.z0_re = 1.0;
    c.disk.modes = 2;
    const auto dir = fresh_dir("dissip");
    run_disk_spectrum(c, dir.string());
    CHECK(summary(dir)["min_im_lambda"].get<double>() < 0.0);
  }

  TEST_CASE("weyl and criteria runs") {
    ExperimentConfig c;
    c.command = "weyl-fit";
    auto dir = fresh_dir("weyl");
    run_command(c, dir.string());
    CHECK(std::abs(summary(dir)["exponent"].get<double>() - 0.5) <= 0.02);
    c.command = "criteria";
    c.distribution.kind = "pareto_imaginary";
    c.distribution.a = 0.5;
    dir = fresh_dir("crit");
    run_command(c, dir.string());
    const auto js = summary(dir);
    CHECK(js["consistent"] == true);
    CHECK(js["external_spectrum"].is_null());
  }

  TEST_CASE("transition run is independent of the thread count") {
    auto c = small_transition();
    c.run.threads = 1;
    const auto d1 = fresh_dir("tr1");
    run_transition(c, d1.string());
    c.run.threads = 6;
    const auto d6 = fresh_dir("tr6");
    run_transition(c, d6.string());
    CHECK(slurp(d1 / "transition.csv") == slurp(d6 / "transition.csv"));
    CHECK(slurp(d1 / "summary.json") == slurp(d6 / "summary.json"));
  }

  TEST_CASE("format selection") {
    auto c = small_transition();
    c.run.formats = {"json"};
    const auto dir = fresh_dir("fmt");
    run_transition(c, dir.string());
    CHECK_FALSE(fs::exists(dir / "transition.csv"));
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(verify_manifest(dir.string()));
  }

  TEST_CASE("binary exit codes") {
    const auto dir = fresh_dir("bin");
    const auto cfg = dir.string() + ".cfg";
    std::ofstream(cfg) << "[lab]\nsamples = 20\n";
    CHECK(run_cli("lab " + cfg + " --out " + dir.string()) == 0);
    CHECK(verify_manifest(dir.string()));
    std::ofstream(cfg) << "[lab]\nn = 3\n";
    CHECK(run_cli("lab " + cfg + " --out " + dir.string()) == 1);
    std::ofstream(cfg) << "[lab]\nbogus = 1\n";
    CHECK(run_cli("lab " + cfg + " --out " + dir.string()) == 1);
    CHECK(run_cli("lab /nonexistent.cfg") == 1);
    CHECK(run_cli("") == 1);
    CHECK(run_cli("transition --threads 0") == 1);
    fs::remove(cfg);
  }

  TEST_CASE("output directory from the environment") {
    const auto dir = fresh_dir("env");
    const auto cfg = dir.string() + ".cfg";
    std::ofstream(cfg) << "[lab]\nsamples = 10\n";
    const int rc = std::system(("DLAB_OUT=" + dir.string() + " " + DLAB_CLI_PATH + " lab " + cfg + " >/dev/null 2>&1").c_str());
    CHECK(rc == 0);
    CHECK(fs::exists(dir / "manifest.json"));
    fs::remove(cfg);
  }
}
