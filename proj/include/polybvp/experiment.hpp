#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "polybvp/bootstrap.hpp"
#include "polybvp/problem.hpp"
#include "polybvp/problem_io.hpp"
#include "polybvp/tracker.hpp"

namespace polybvp {

inline const char* to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::None: return "none";
    case FilterKind::Symmetry: return "sym";
    case FilterKind::ThirdDerivative: return "yppp";
    case FilterKind::Conjunction: return "both";
  }
  return "none";
}

struct RunConfig {
  std::string problem;  // preset name or problem file path
  std::optional<double> lambda;
  int n_max = 9;
  FilterSpec filter;
  std::uint64_t seed = 17;
  int stable_k = 0;  // 0: run to n_max; k: stop after k stable REAL counts
  TrackerConfig tracker;
  double eps_real = 1e-8;
  double dedup_tol = 1e-8;
  int threads = 0;  // 0: one worker per hardware thread
  std::string out_dir = ".";
  std::set<std::string> emit = {"summary", "solutions", "plotdata",
                                "errors_table"};
  bool quiet = false;
};

inline BvpProblem resolve_problem(const RunConfig& cfg) {
  if (is_preset(cfg.problem)) return make_preset(cfg.problem, cfg.lambda);
  if (cfg.lambda)
    throw ValidationError("--lambda applies to presets, not problem files");
  return parse_problem_file(cfg.problem);
}

namespace detail {

/// Best achievable deviation from the closed form at this stage: each real
/// solution is polished on its real restriction first, then the smallest
/// maximal error wins.
inline std::optional<ErrorRow> error_row(const BvpProblem& prob,
                                         const StageSet& stage) {
  if (!prob.exact_solution) return std::nullopt;
  std::optional<double> best;
  for (const auto& sol : stage.solutions) {
    if (!sol.is_real) continue;
    SolutionVector restricted = sol;
    restricted.values = sol.values.real().cast<Complex>();
    try {
      restricted = newton_refine(prob, restricted, 1e-12, 50);
    } catch (const NonConvergence&) {
      continue;
    }
    const double err = max_error_vs_exact(prob, restricted);
    if (!best || err < *best) best = err;
  }
  if (!best) return std::nullopt;
  // the h_squared column reports the squared spacing of the next
  // refinement, (b-a)^2/(N+2)^2, to pair with the ratio column.
  const double h_pub = (prob.b - prob.a) / (stage.n + 2);
  return ErrorRow{stage.n, *best, h_pub * h_pub, *best / (h_pub * h_pub)};
}

inline std::string lambda_text(const std::optional<double>& lambda) {
  return lambda ? format("%.17g", *lambda) : std::string("-");
}

}  // namespace detail

/// Runs the bootstrap for one configuration and writes the requested
/// artifacts into out_dir. Returns 0 on success, 2 when a stage lost every
/// path and the run stopped early (partial outputs are still written).
inline int run_experiment(const RunConfig& cfg) {
  if (cfg.n_max < 1) throw ValidationError("--max-n must be >= 1");
  for (const auto& token : cfg.emit)
    if (token != "summary" && token != "solutions" && token != "plotdata" &&
        token != "errors_table")
      throw ValidationError("unknown --emit token: " + token);
  const BvpProblem prob = resolve_problem(cfg);

  namespace fs = std::filesystem;
  const fs::path out_dir(cfg.out_dir);
  fs::create_directories(out_dir);

  std::vector<ErrorRow> error_rows;
  auto on_stage = [&](const StageSet& stage) {
    if (cfg.emit.count("solutions")) {
      std::ofstream out(out_dir /
                        ("stage_" + std::to_string(stage.n) +
                         "_solutions.csv"));
      write_solutions_csv(out, prob, stage);
    }
    if (const auto row = detail::error_row(prob, stage))
      error_rows.push_back(*row);
    if (!cfg.quiet) {
      const auto& r = stage.report;
      std::printf(
          "stage %2d: sols=%ld reals=%ld paths=%ld diverged=%ld "
          "failures=%ld filtered=%ld (%.2f s)\n",
          r.n, r.sols, r.reals, r.paths_tracked, r.diverged, r.failures,
          r.filtered_out, r.wall_seconds);
      std::fflush(stdout);
    }
  };

  const BootstrapResult result = run_bootstrap(
      prob, cfg.tracker, cfg.filter, StopRule{cfg.n_max, cfg.stable_k},
      cfg.seed, on_stage, cfg.eps_real, cfg.dedup_tol, cfg.threads);

  if (cfg.emit.count("summary")) {
    std::ofstream out(out_dir / "summary.txt");
    std::vector<std::pair<std::string, std::string>> header{
        {"problem", prob.name},
        {"lambda", detail::lambda_text(cfg.lambda)},
        {"seed", std::to_string(cfg.seed)},
        {"max_n", std::to_string(cfg.n_max)},
        {"filter", to_string(cfg.filter.kind)},
        {"filter_start_n", std::to_string(cfg.filter.start_at)},
    };
    write_summary(out, header, result.reports);
  }
  if (cfg.emit.count("errors_table") && prob.exact_solution) {
    std::ofstream out(out_dir / "errors.csv");
    write_errors_csv(out, error_rows);
  }
  if (cfg.emit.count("plotdata")) {
    int k = 0;
    for (const auto& sol : result.final_set.solutions) {
      if (!sol.is_real) continue;
      std::ofstream out(out_dir / ("plot_" + std::to_string(++k) + ".dat"));
      write_plot_data(out, prob, sol);
    }
  }
  if (result.aborted) {
    std::fprintf(stderr, "run aborted: stage %d produced no solutions\n",
                 result.final_set.n);
    return 2;
  }
  return 0;
}

}  // namespace polybvp
