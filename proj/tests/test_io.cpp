#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "polybvp/experiment.hpp"
#include "polybvp/problem_io.hpp"

using polybvp::BvpProblem;
using polybvp::RunConfig;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("problem files parse") {
  std::istringstream in(
      "# benchmark\n"
      "name: bvp2\n"
      "a: 0\n"
      "b: 1\n"
      "alpha: 0.5\n"
      "beta: 0.333333333333333\n"
      "coeffs: [0, 0, 0, 2]\n");
  const BvpProblem prob = polybvp::parse_problem(in, "inline");
  CHECK(prob.name == "bvp2");
  CHECK(prob.p.degree() == 3);
  CHECK(prob.p.coeffs(3) == 2.0);
  CHECK(prob.beta == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("problem file diagnostics") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return polybvp::parse_problem(in, "inline");
  };
  const std::string head =
      "name: t\na: 0\nb: 1\nalpha: 0\nbeta: 0\n";

  CHECK_THROWS_AS((void)parse(head + "coeffs: [0, 0, 0]\n"),
                  polybvp::ValidationError);  // zero leading coefficient
  CHECK_THROWS_AS((void)parse(head + "coeffs: [4]\n"),
                  polybvp::ValidationError);  // degree < 1
  CHECK_THROWS_AS((void)parse(head), polybvp::ParseError);  // missing coeffs
  CHECK_THROWS_AS((void)parse("a: 0\nb: 1\nalpha: 0\nbeta: 0\n"
                              "coeffs: [0,1]\n"),
                  polybvp::ParseError);  // missing name
  CHECK_THROWS_AS((void)parse(head + "coeffs: [0, x]\n"),
                  polybvp::ParseError);
  CHECK_THROWS_AS((void)parse(head + "coeffs: [0,1]\nwidth: 3\n"),
                  polybvp::ParseError);  // unknown field
  CHECK_THROWS_AS(
      (void)parse("name: t\na: 1\nb: 0\nalpha: 0\nbeta: 0\ncoeffs: [0,1]\n"),
      polybvp::ValidationError);  // b <= a
  CHECK_THROWS_AS((void)polybvp::parse_problem_file("/nonexistent/p.txt"),
                  polybvp::ParseError);
}

TEST_CASE("solution csv round-trips below the endpoint tolerance") {
  const BvpProblem prob = polybvp::preset_bvp2();
  polybvp::StageSet stage = polybvp::solve_stage_one(prob);
  for (int n = 2; n <= 4; ++n)
    stage = polybvp::advance_stage(prob, stage, polybvp::TrackerConfig{},
                                   polybvp::FilterSpec{}, 17);

  std::stringstream buffer;
  polybvp::write_solutions_csv(buffer, prob, stage);
  const auto loaded = polybvp::read_solutions_csv(buffer);
  REQUIRE(loaded.size() == stage.solutions.size());
  for (const auto& sol : loaded)
    CHECK(polybvp::residual(prob, sol.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("run_experiment writes the requested artifacts") {
  RunConfig cfg;
  cfg.problem = "bvp2";
  cfg.n_max = 4;
  cfg.quiet = true;
  cfg.out_dir = fresh_dir("polybvp_io_a").string();
  REQUIRE(polybvp::run_experiment(cfg) == 0);

  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  CHECK(fs::exists(dir / "summary.txt"));
  CHECK(fs::exists(dir / "errors.csv"));
  for (int n = 1; n <= 4; ++n)
    CHECK(fs::exists(dir / ("stage_" + std::to_string(n) +
                            "_solutions.csv")));
  CHECK(fs::exists(dir / "plot_1.dat"));
  CHECK_FALSE(fs::exists(dir / "plot_2.dat"));  // only one real solution

  const std::string summary = slurp(dir / "summary.txt");
  CHECK(summary.find("SOLS") != std::string::npos);
  CHECK(summary.find("# problem: bvp2") != std::string::npos);
}

TEST_CASE("identical configurations produce identical bytes") {
  RunConfig cfg;
  cfg.problem = "bvp3";
  cfg.lambda = 2.0;
  cfg.n_max = 5;
  cfg.quiet = true;
  cfg.seed = 99;

  cfg.out_dir = fresh_dir("polybvp_io_b1").string();
  REQUIRE(polybvp::run_experiment(cfg) == 0);
  const std::string first = slurp(std::filesystem::path(cfg.out_dir) /
                                  "summary.txt");
  const std::string first_csv =
      slurp(std::filesystem::path(cfg.out_dir) / "stage_5_solutions.csv");

  cfg.out_dir = fresh_dir("polybvp_io_b2").string();
  REQUIRE(polybvp::run_experiment(cfg) == 0);
  CHECK(first == slurp(std::filesystem::path(cfg.out_dir) / "summary.txt"));
  CHECK(first_csv ==
        slurp(std::filesystem::path(cfg.out_dir) / "stage_5_solutions.csv"));
}

TEST_CASE("plot data for bvp3 shows two symmetric curves") {
  RunConfig cfg;
  cfg.problem = "bvp3";
  cfg.lambda = 2.0;
  cfg.n_max = 8;
  cfg.quiet = true;
  cfg.filter.kind = polybvp::FilterKind::Symmetry;
  cfg.filter.start_at = 4;
  cfg.out_dir = fresh_dir("polybvp_io_c").string();
  REQUIRE(polybvp::run_experiment(cfg) == 0);

  namespace fs = std::filesystem;
  int plots = 0;
  for (int k = 1; k <= 4; ++k)
    if (fs::exists(fs::path(cfg.out_dir) / ("plot_" + std::to_string(k) +
                                            ".dat")))
      ++plots;
  CHECK(plots == 2);

  for (int k = 1; k <= 2; ++k) {
    std::ifstream in(fs::path(cfg.out_dir) / ("plot_" + std::to_string(k) +
                                              ".dat"));
    std::vector<double> xs, ys;
    double x = 0.0, y = 0.0;
    while (in >> x >> y) {
      xs.push_back(x);
      ys.push_back(y);
    }
    REQUIRE(xs.size() == 10);  // 8 interior + 2 boundary rows
    CHECK(xs.front() == 0.0);
    CHECK(xs.back() == 1.0);
    CHECK(ys.front() == 0.0);
    CHECK(ys.back() == 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      CHECK(ys[i] >= -1e-9);  // solutions of this problem are nonnegative
      const std::size_t mirror = xs.size() - 1 - i;
      CHECK(ys[i] == doctest::Approx(ys[mirror]).epsilon(1e-6));
    }
  }
}

TEST_CASE("emit set restricts outputs") {
  RunConfig cfg;
  cfg.problem = "bvp2";
  cfg.n_max = 2;
  cfg.quiet = true;
  cfg.emit = {"summary"};
  cfg.out_dir = fresh_dir("polybvp_io_d").string();
  REQUIRE(polybvp::run_experiment(cfg) == 0);
  namespace fs = std::filesystem;
  CHECK(fs::exists(fs::path(cfg.out_dir) / "summary.txt"));
  CHECK_FALSE(fs::exists(fs::path(cfg.out_dir) / "errors.csv"));
  CHECK_FALSE(fs::exists(fs::path(cfg.out_dir) / "stage_1_solutions.csv"));

  cfg.emit = {"nonsense"};
  CHECK_THROWS_AS((void)polybvp::run_experiment(cfg),
                  polybvp::ValidationError);
}
