#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <thread>
#include <utility>
#include <vector>

#include "polybvp/homotopy.hpp"
#include "polybvp/polynomial.hpp"
#include "polybvp/problem.hpp"
#include "polybvp/tracker.hpp"

namespace polybvp {

enum class FilterKind { None, Symmetry, ThirdDerivative, Conjunction };

struct FilterSpec {
  FilterKind kind = FilterKind::None;
  double eps_sym = 1e-8;
  double eps2 = 1e3;
  int start_at = 4;  // first stage the filter applies to
};

struct StageReport {
  int n = 0;
  std::uint64_t seed = 0;
  long paths_tracked = 0;
  long sols = 0;   // distinct converged endpoints
  long reals = 0;  // of which real to eps_real
  long diverged = 0;
  long failures = 0;
  long duplicates = 0;
  long filtered_out = 0;
  long kept = 0;        // carried into the next stage
  long kept_reals = 0;  // real solutions among the carried set
  double wall_seconds = 0.0;
};

/// The solution set carried forward from one stage (after any filtering),
/// together with the stage statistics.
struct StageSet {
  int n = 0;
  std::vector<SolutionVector> solutions;
  StageReport report;
};

/// Sets and returns the realness flag: every imaginary part below eps_real.
inline bool classify_real(SolutionVector& y, double eps_real = 1e-8) {
  y.is_real = y.values.imag().cwiseAbs().maxCoeff() < eps_real;
  return y.is_real;
}

/// Keep solutions whose first and last values agree in modulus: valid when
/// every true solution has odd or even symmetry about the midpoint.
inline bool keep_symmetry(const SolutionVector& y, double eps_sym) {
  const int n = y.n();
  return std::abs(std::abs(y.values(0)) - std::abs(y.values(n - 1))) < eps_sym;
}

/// Total mismatch between the discretized third derivative and p'(y) y'
/// over interior points 2..N-1, with boundary values substituted where the
/// wide stencil reaches past the ends. Large scores flag wildly oscillating
/// spurious solutions.
inline double third_derivative_score(const BvpProblem& prob,
                                     const SolutionVector& y) {
  const int n = y.n();
  if (n < 4) return 0.0;
  const double h = (prob.b - prob.a) / (n + 1);
  const Polynomial dp = derivative(prob.p);
  auto at = [&](int i) -> Complex {
    if (i == 0) return Complex(prob.alpha);
    if (i == n + 1) return Complex(prob.beta);
    return y.values(i - 1);
  };
  double total = 0.0;
  for (int i = 2; i <= n - 1; ++i) {
    const Complex third =
        (at(i + 2) - 2.0 * at(i + 1) + 2.0 * at(i - 1) - at(i - 2)) /
        (2.0 * h * h * h);
    const Complex first = (at(i + 1) - at(i - 1)) / (2.0 * h);
    total += std::abs(third - eval(dp, at(i)) * first);
  }
  return total;
}

inline bool keep_third_derivative(const BvpProblem& prob,
                                  const SolutionVector& y, double eps2) {
  return third_derivative_score(prob, y) <= eps2;
}

/// Applies the configured filter at stage n. The symmetry test needs at
/// least two points and the third-derivative stencil at least four, so each
/// part stays inactive below that, independent of start_at.
inline bool filter_keeps(const BvpProblem& prob, const FilterSpec& filter,
                         const SolutionVector& y, int n) {
  if (filter.kind == FilterKind::None || n < filter.start_at) return true;
  bool keep = true;
  if (filter.kind == FilterKind::Symmetry ||
      filter.kind == FilterKind::Conjunction)
    keep = keep && (n < 2 || keep_symmetry(y, filter.eps_sym));
  if (filter.kind == FilterKind::ThirdDerivative ||
      filter.kind == FilterKind::Conjunction)
    keep = keep && (n < 4 || keep_third_derivative(prob, y, filter.eps2));
  return keep;
}

/// Greedy clustering in max norm; the first-seen member of each cluster is
/// kept, so output order follows start order deterministically.
inline std::vector<SolutionVector> dedup(
    const std::vector<SolutionVector>& points, double tol = 1e-8) {
  std::vector<SolutionVector> kept;
  kept.reserve(points.size());
  for (const auto& cand : points) {
    bool duplicate = false;
    for (const auto& rep : kept) {
      if (rep.n() == cand.n() &&
          (rep.values - cand.values).cwiseAbs().maxCoeff() < tol) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push_back(cand);
  }
  return kept;
}

/// Piecewise-linear resampling of a real solution (with its boundary values)
/// onto a finer uniform mesh, as a Newton starting guess.
inline SolutionVector interpolate_to_mesh(const BvpProblem& prob,
                                          const SolutionVector& y,
                                          int target_interior) {
  const int n = y.n();
  if (target_interior <= n)
    throw ValidationError("interpolate_to_mesh: target mesh must be finer");
  const Mesh coarse = mesh_for(prob, n);
  const Mesh fine = mesh_for(prob, target_interior);
  auto value_at = [&](int i) -> double {
    if (i <= 0) return prob.alpha;
    if (i >= n + 1) return prob.beta;
    return y.values(i - 1).real();
  };
  SolutionVector out;
  out.values.resize(target_interior);
  out.is_real = true;
  out.stage = target_interior;
  for (int j = 1; j <= target_interior; ++j) {
    const double x = fine.node(j);
    const int k = std::min(static_cast<int>((x - prob.a) / coarse.h), n);
    const double w = (x - coarse.node(k)) / coarse.h;
    out.values(j - 1) =
        Complex(value_at(k) * (1.0 - w) + value_at(k + 1) * w);
  }
  return out;
}

/// Stage one: the single stencil equation alpha - 2 y_1 + beta - h^2 p(y_1)
/// solved by the one-variable root finder.
inline StageSet solve_stage_one(const BvpProblem& prob,
                                double eps_real = 1e-8) {
  validate(prob);
  const auto t0 = std::chrono::steady_clock::now();
  const double h = 0.5 * (prob.b - prob.a);
  Eigen::VectorXcd c = (-(h * h) * prob.p.coeffs).cast<Complex>();
  c(0) += prob.alpha + prob.beta;
  c(1) -= 2.0;
  const Eigen::VectorXcd roots = all_roots(c);

  StageSet stage;
  stage.n = 1;
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    SolutionVector v{CVector::Constant(1, roots(i)), false, 1,
                     static_cast<int>(i)};
    if (classify_real(v, eps_real)) ++stage.report.reals;
    stage.solutions.push_back(std::move(v));
  }
  stage.report.n = 1;
  stage.report.sols = static_cast<long>(stage.solutions.size());
  stage.report.kept = stage.report.sols;
  stage.report.kept_reals = stage.report.reals;
  stage.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return stage;
}

/// gamma for one stage, derived from the run seed so that stages are
/// reproducible independently of each other.
inline Complex stage_gamma(std::uint64_t seed, int stage_n) {
  return random_unit_gamma(seed +
                           0x9E3779B97F4A7C15ull *
                               static_cast<std::uint64_t>(stage_n));
}

namespace detail {

inline std::vector<PathResult> track_all(const HomotopyStage& stage,
                                         const std::vector<CVector>& starts,
                                         const TrackerConfig& cfg,
                                         int threads) {
  std::vector<PathResult> results(starts.size());
  auto run_one = [&](std::size_t i) {
    results[i] = track_path(stage, starts[i], cfg);
    results[i].start_index = static_cast<int>(i);
  };
  unsigned workers = threads > 0
                         ? static_cast<unsigned>(threads)
                         : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers,
                               static_cast<unsigned>(starts.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < starts.size(); ++i) run_one(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= starts.size()) return;
        run_one(i);
      }
    });
  }
  for (auto& th : pool) th.join();
  return results;
}

}  // namespace detail

/// One refinement step: build the homotopy with a fresh gamma, seed d start
/// points per carried solution from the start polynomial, track every path,
/// then deduplicate, classify and filter the endpoints.
inline StageSet advance_stage(const BvpProblem& prob, const StageSet& prev,
                              const TrackerConfig& cfg,
                              const FilterSpec& filter, std::uint64_t seed,
                              double eps_real = 1e-8, double dedup_tol = 1e-8,
                              int threads = 0) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n_next = prev.n + 1;
  const HomotopyStage stage =
      make_stage(prob, prev.n, stage_gamma(seed, n_next));
  const int degree = prob.p.degree();

  std::vector<CVector> starts;
  starts.reserve(prev.solutions.size() * degree);
  for (const auto& sol : prev.solutions) {
    const Eigen::VectorXcd roots =
        all_roots(start_coefficients(stage, sol.values(prev.n - 1)));
    for (Eigen::Index r = 0; r < roots.size(); ++r) {
      CVector start(n_next);
      start.head(prev.n) = sol.values;
      start(n_next - 1) = roots(r);
      starts.push_back(std::move(start));
    }
  }

  const std::vector<PathResult> results =
      detail::track_all(stage, starts, cfg, threads);

  StageReport rep;
  rep.n = n_next;
  rep.seed = seed;
  rep.paths_tracked = static_cast<long>(starts.size());
  std::vector<SolutionVector> converged;
  converged.reserve(results.size());
  for (const auto& res : results) {
    switch (res.status) {
      case PathStatus::Converged: {
        SolutionVector v = res.endpoint;
        v.stage = n_next;
        v.path = res.start_index;
        converged.push_back(std::move(v));
        break;
      }
      case PathStatus::Diverged:
        ++rep.diverged;
        break;
      default:
        ++rep.failures;
        break;
    }
  }

  std::vector<SolutionVector> unique = dedup(converged, dedup_tol);
  rep.duplicates = static_cast<long>(converged.size() - unique.size());
  rep.sols = static_cast<long>(unique.size());
  for (auto& u : unique)
    if (classify_real(u, eps_real)) ++rep.reals;

  StageSet out;
  out.n = n_next;
  out.solutions.reserve(unique.size());
  for (auto& u : unique) {
    if (filter_keeps(prob, filter, u, n_next)) {
      if (u.is_real) ++rep.kept_reals;
      out.solutions.push_back(std::move(u));
    } else {
      ++rep.filtered_out;
    }
  }
  rep.kept = static_cast<long>(out.solutions.size());
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  out.report = rep;
  return out;
}

struct StopRule {
  int n_max = 9;
  int stable_k = 0;  // stop once REAL(N) is unchanged for this many stages
};

struct BootstrapResult {
  std::vector<StageReport> reports;
  StageSet final_set;
  bool aborted = false;  // a stage lost every path
};

/// The full bootstrapping loop: stage one by direct root finding, then one
/// homotopy refinement per added mesh point until n_max (or until the real
/// count stabilizes, when stable_k is set). on_stage fires after each stage.
inline BootstrapResult run_bootstrap(
    const BvpProblem& prob, const TrackerConfig& cfg, const FilterSpec& filter,
    StopRule stop, std::uint64_t seed,
    const std::function<void(const StageSet&)>& on_stage = {},
    double eps_real = 1e-8, double dedup_tol = 1e-8, int threads = 0) {
  if (stop.n_max < 1) throw ValidationError("n_max must be >= 1");
  BootstrapResult result;

  StageSet current = solve_stage_one(prob, eps_real);
  current.report.seed = seed;
  result.reports.push_back(current.report);
  if (on_stage) on_stage(current);

  auto stabilized = [&] {
    const std::size_t k = static_cast<std::size_t>(stop.stable_k);
    if (stop.stable_k <= 0 || result.reports.size() < k) return false;
    const long ref = result.reports.back().reals;
    for (std::size_t i = result.reports.size() - k;
         i < result.reports.size(); ++i)
      if (result.reports[i].reals != ref) return false;
    return true;
  };

  while (current.n < stop.n_max && !stabilized()) {
    if (current.solutions.empty()) {
      result.aborted = true;
      break;
    }
    StageSet next = advance_stage(prob, current, cfg, filter, seed, eps_real,
                                  dedup_tol, threads);
    result.reports.push_back(next.report);
    if (on_stage) on_stage(next);
    current = std::move(next);
    if (current.report.sols == 0) {
      result.aborted = true;
      break;
    }
  }
  result.final_set = std::move(current);
  return result;
}

}  // namespace polybvp
