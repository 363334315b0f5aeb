#include <doctest.h>

#include <cmath>
#include <vector>

#include "polybvp/bootstrap.hpp"
#include "polybvp/tracker.hpp"

using polybvp::BvpProblem;
using polybvp::Complex;
using polybvp::CVector;
using polybvp::FilterKind;
using polybvp::FilterSpec;
using polybvp::Polynomial;
using polybvp::SolutionVector;
using polybvp::StageSet;
using polybvp::TrackerConfig;

namespace {

SolutionVector make_solution(std::initializer_list<Complex> values) {
  SolutionVector v;
  v.values.resize(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const Complex& z : values) v.values(i++) = z;
  return v;
}

bool contains(const std::vector<SolutionVector>& set, const CVector& target,
              double tol) {
  for (const auto& s : set)
    if (s.n() == target.size() &&
        (s.values - target).cwiseAbs().maxCoeff() < tol)
      return true;
  return false;
}

}  // namespace

TEST_CASE("stage one roots for the benchmark problems") {
  const StageSet bvp2 = polybvp::solve_stage_one(polybvp::preset_bvp2());
  CHECK(bvp2.solutions.size() == 3);
  CHECK(bvp2.report.reals == 1);
  for (const auto& s : bvp2.solutions)
    if (s.is_real) {
      CHECK(s.values(0).real() > 0.39);
      CHECK(s.values(0).real() < 0.41);
    }

  const StageSet bvp4 = polybvp::solve_stage_one(polybvp::preset_bvp4(1.0));
  CHECK(bvp4.solutions.size() == 3);
  CHECK(bvp4.report.reals == 3);
  const double amp = std::sqrt(8.0);
  CHECK(contains(bvp4.solutions, CVector::Constant(1, Complex(0.0)), 1e-10));
  CHECK(contains(bvp4.solutions, CVector::Constant(1, Complex(amp)), 1e-10));
  CHECK(contains(bvp4.solutions, CVector::Constant(1, Complex(-amp)), 1e-10));

  const StageSet bvp3 = polybvp::solve_stage_one(polybvp::preset_bvp3(2.0));
  CHECK(bvp3.solutions.size() == 2);
  CHECK(bvp3.report.reals == 2);
  const double root3 = std::sqrt(3.0);
  CHECK(contains(bvp3.solutions, CVector::Constant(1, Complex(2.0 - root3)),
                 1e-10));
  CHECK(contains(bvp3.solutions, CVector::Constant(1, Complex(2.0 + root3)),
                 1e-10));
}

TEST_CASE("advancing bvp4 reproduces the early solution counts") {
  const BvpProblem prob = polybvp::preset_bvp4(1.0);
  const TrackerConfig cfg;
  const FilterSpec no_filter;
  StageSet stage = polybvp::solve_stage_one(prob);

  stage = polybvp::advance_stage(prob, stage, cfg, no_filter, 17);
  CHECK(stage.report.paths_tracked == 9);
  CHECK(stage.report.sols == 3);
  CHECK(stage.report.reals == 3);
  CHECK(stage.report.sols + stage.report.diverged + stage.report.failures +
            stage.report.duplicates ==
        stage.report.paths_tracked);

  stage = polybvp::advance_stage(prob, stage, cfg, no_filter, 17);
  CHECK(stage.report.paths_tracked == 9);
  CHECK(stage.report.sols == 9);
  CHECK(stage.report.reals == 3);

  stage = polybvp::advance_stage(prob, stage, cfg, no_filter, 17);
  CHECK(stage.report.paths_tracked == 27);
  CHECK(stage.report.sols == 27);
  CHECK(stage.report.reals == 7);
}

TEST_CASE("classify_real thresholds") {
  SolutionVector a = make_solution({Complex(0.4, 0.0)});
  CHECK(polybvp::classify_real(a));
  SolutionVector b = make_solution({Complex(0.4, 1e-12), Complex(0.3, -1e-13)});
  CHECK(polybvp::classify_real(b));
  SolutionVector c = make_solution({Complex(0.4, 1e-3)});
  CHECK_FALSE(polybvp::classify_real(c));
  CHECK_FALSE(c.is_real);
}

TEST_CASE("symmetry filter keeps odd and even vectors") {
  CHECK(polybvp::keep_symmetry(make_solution({1.0, 2.0, 1.0}), 1e-8));
  CHECK(polybvp::keep_symmetry(make_solution({1.0, 0.0, -1.0}), 1e-8));
  CHECK_FALSE(polybvp::keep_symmetry(make_solution({1.0, 0.0, 0.5}), 1e-8));
}

TEST_CASE("third-derivative score on consistent and constant data") {
  // discrete solution of the linear problem: both stencils are consistent
  BvpProblem linear{"linear", 0.0, 1.0, 1.0, 2.0, Polynomial{0.0, 1.0}, {}};
  const int n = 9;
  const CVector zero = CVector::Zero(n);
  SolutionVector sol;
  sol.values = polybvp::solve(polybvp::jacobian(linear, zero),
                              (-polybvp::residual(linear, zero)).eval());
  CHECK(polybvp::third_derivative_score(linear, sol) < 0.1);

  // the all-zero solution of duffing3 with matching boundary values
  const BvpProblem duffing = polybvp::preset_duffing3(1.0);
  SolutionVector trivial;
  trivial.values = CVector::Zero(6);
  CHECK(polybvp::third_derivative_score(duffing, trivial) == 0.0);
  CHECK(polybvp::keep_third_derivative(duffing, trivial, 1e-12));
}

TEST_CASE("dedup keeps first-seen representatives") {
  SolutionVector a = make_solution({Complex(1.0), Complex(2.0)});
  SolutionVector b = a;
  auto kept = polybvp::dedup({a, b}, 1e-8);
  CHECK(kept.size() == 1);

  SolutionVector c = a;
  c.values(0) += Complex(2e-8, 0.0);
  kept = polybvp::dedup({a, c}, 1e-8);
  CHECK(kept.size() == 2);
}

TEST_CASE("interpolation onto a finer mesh") {
  BvpProblem prob{"interp", 0.0, 1.0, 1.0, 3.0, Polynomial{0.0, 1.0}, {}};
  SolutionVector coarse = make_solution({Complex(2.0)});
  const SolutionVector fine = polybvp::interpolate_to_mesh(prob, coarse, 3);
  REQUIRE(fine.n() == 3);
  CHECK(fine.values(0).real() == doctest::Approx(1.5));
  CHECK(fine.values(1).real() == doctest::Approx(2.0));
  CHECK(fine.values(2).real() == doctest::Approx(2.5));

  // exact samples of a linear function stay exact on any finer mesh
  BvpProblem line{"line", 0.0, 1.0, 0.0, 1.0, Polynomial{0.0, 1.0}, {}};
  SolutionVector samples;
  samples.values.resize(4);
  for (int i = 0; i < 4; ++i) samples.values(i) = Complex((i + 1) / 5.0);
  const SolutionVector refined =
      polybvp::interpolate_to_mesh(line, samples, 9);
  for (int j = 0; j < 9; ++j)
    CHECK(refined.values(j).real() == doctest::Approx((j + 1) / 10.0));

  CHECK_THROWS_AS(
      (void)polybvp::interpolate_to_mesh(line, samples, 3),
      polybvp::ValidationError);
}

TEST_CASE("bootstrap on bvp2 finds one real solution per stage") {
  const BvpProblem prob = polybvp::preset_bvp2();
  const polybvp::BootstrapResult result = polybvp::run_bootstrap(
      prob, TrackerConfig{}, FilterSpec{}, polybvp::StopRule{5, 0}, 17);
  REQUIRE(result.reports.size() == 5);
  long expected_sols = 1;
  for (const auto& rep : result.reports) {
    expected_sols *= 3;
    CHECK(rep.sols == expected_sols);
    CHECK(rep.reals == 1);
  }
  CHECK_FALSE(result.aborted);
}

TEST_CASE("real counts are invariant across gamma seeds") {
  const BvpProblem prob = polybvp::preset_bvp4(1.0);
  std::vector<long> reference;
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    const polybvp::BootstrapResult result = polybvp::run_bootstrap(
        prob, TrackerConfig{}, FilterSpec{}, polybvp::StopRule{5, 0}, seed);
    std::vector<long> reals;
    for (const auto& rep : result.reports) reals.push_back(rep.reals);
    if (reference.empty())
      reference = reals;
    else
      CHECK(reals == reference);
  }
  REQUIRE(reference.size() == 5);
  CHECK(reference == std::vector<long>{3, 3, 3, 7, 11});
}

TEST_CASE("complete solution sets close under conjugation") {
  // bvp2 and bvp3 reach the full Bezout count each stage, so the found set
  // is the entire (conjugation-symmetric) solution set of a real system
  const polybvp::BootstrapResult bvp2 = polybvp::run_bootstrap(
      polybvp::preset_bvp2(), TrackerConfig{}, FilterSpec{},
      polybvp::StopRule{4, 0}, 17);
  for (const auto& s : bvp2.final_set.solutions)
    CHECK(contains(bvp2.final_set.solutions, s.values.conjugate(), 1e-8));

  const polybvp::BootstrapResult bvp3 = polybvp::run_bootstrap(
      polybvp::preset_bvp3(2.0), TrackerConfig{}, FilterSpec{},
      polybvp::StopRule{5, 0}, 17);
  for (const auto& s : bvp3.final_set.solutions)
    CHECK(contains(bvp3.final_set.solutions, s.values.conjugate(), 1e-8));
}

TEST_CASE("odd problems close under negation with an odd real count") {
  // bvp4 finds a strict subset of each stage's solutions (the two triple
  // solutions of the two-point stage absorb six paths), so conjugation
  // closure cannot hold there; negation symmetry survives because the
  // whole homotopy is odd when alpha = beta = 0.
  const BvpProblem prob = polybvp::preset_bvp4(1.0);
  polybvp::BootstrapResult result = polybvp::run_bootstrap(
      prob, TrackerConfig{}, FilterSpec{}, polybvp::StopRule{4, 0}, 17);
  const auto& set = result.final_set.solutions;
  CHECK(set.size() == 27);
  for (const auto& s : set)
    CHECK(contains(set, (-s.values).eval(), 1e-8));
  for (const auto& rep : result.reports) CHECK(rep.reals % 2 == 1);
}

TEST_CASE("path accounting and the Bezout ceiling hold per stage") {
  for (const auto& prob :
       {polybvp::preset_bvp3(2.0), polybvp::preset_bratu2(0.5)}) {
    const polybvp::BootstrapResult result = polybvp::run_bootstrap(
        prob, TrackerConfig{}, FilterSpec{}, polybvp::StopRule{6, 0}, 17);
    const int d = prob.p.degree();
    long bezout = 1;
    long prev_kept = 0;
    for (const auto& rep : result.reports) {
      bezout *= d;
      CHECK(rep.sols <= bezout);
      if (rep.n > 1) {
        CHECK(rep.paths_tracked == d * prev_kept);
        CHECK(rep.sols + rep.diverged + rep.failures + rep.duplicates ==
              rep.paths_tracked);
      }
      prev_kept = rep.kept;
    }
  }
}

TEST_CASE("stabilization rule stops the run early") {
  const BvpProblem prob = polybvp::preset_bvp2();
  const polybvp::BootstrapResult result = polybvp::run_bootstrap(
      prob, TrackerConfig{}, FilterSpec{}, polybvp::StopRule{9, 3}, 17);
  CHECK(result.reports.size() == 3);  // REAL = 1 from the first stage on
  CHECK(result.final_set.n == 3);
}

TEST_CASE("filters reduce the carried set but not the found counts") {
  const BvpProblem prob = polybvp::preset_bvp3(2.0);
  FilterSpec filter;
  filter.kind = FilterKind::Symmetry;
  filter.start_at = 4;
  const polybvp::BootstrapResult filtered = polybvp::run_bootstrap(
      prob, TrackerConfig{}, filter, polybvp::StopRule{6, 0}, 17);
  const polybvp::BootstrapResult plain = polybvp::run_bootstrap(
      prob, TrackerConfig{}, FilterSpec{}, polybvp::StopRule{6, 0}, 17);
  for (std::size_t i = 0; i < filtered.reports.size(); ++i) {
    const auto& f = filtered.reports[i];
    CHECK(f.kept + f.filtered_out == f.sols);
    if (f.n < 4) CHECK(f.filtered_out == 0);
    // the filtered run's start set is a subset, so it can only find fewer
    CHECK(plain.reports[i].reals >= f.reals);
    CHECK(plain.reports[i].sols >= f.sols);
  }
  // both real solutions survive the symmetry filter
  long reals = 0;
  for (const auto& s : filtered.final_set.solutions)
    if (s.is_real) ++reals;
  CHECK(reals == 2);
}
