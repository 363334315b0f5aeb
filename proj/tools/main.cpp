// Command-line front end: runs the bootstrapping solver on a preset or a
// problem file and writes summary tables, per-stage solution CSVs, error
// tables and plot data.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "polybvp/experiment.hpp"

namespace {

std::set<std::string> split_tokens(const std::string& csv) {
  std::set<std::string> out;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.insert(item);
  }
  return out;
}

polybvp::FilterKind parse_filter(const std::string& name) {
  if (name == "none") return polybvp::FilterKind::None;
  if (name == "sym") return polybvp::FilterKind::Symmetry;
  if (name == "yppp") return polybvp::FilterKind::ThirdDerivative;
  return polybvp::FilterKind::Conjunction;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Finds the solution sets of finite-difference discretizations of "
      "y'' = p(y) boundary value problems by bootstrapped homotopy "
      "continuation."};

  polybvp::RunConfig cfg;
  std::string filter_name = "none";
  std::string emit_csv = "summary,solutions,plotdata,errors_table";
  double lambda = 0.0;

  app.add_option("--problem", cfg.problem,
                 "Preset name (bvp2, bvp3, bvp4, duffing3, duffing5, bratu2) "
                 "or path to a problem file")
      ->required();
  auto* lambda_opt =
      app.add_option("--lambda", lambda, "Preset parameter lambda");
  app.add_option("--max-n", cfg.n_max, "Finest mesh (interior points)")
      ->capture_default_str();
  app.add_option("--filter", filter_name,
                 "Solution filter carried between stages")
      ->check(CLI::IsMember({"none", "sym", "yppp", "both"}))
      ->capture_default_str();
  app.add_option("--eps-sym", cfg.filter.eps_sym,
                 "Symmetry filter threshold on ||y_1|-|y_N||")
      ->capture_default_str();
  app.add_option("--eps2", cfg.filter.eps2,
                 "Third-derivative filter threshold")
      ->capture_default_str();
  app.add_option("--filter-start-n", cfg.filter.start_at,
                 "First stage the filter applies to")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for the per-stage gamma draws")
      ->capture_default_str();
  app.add_option("--stabilize-k", cfg.stable_k,
                 "Stop once REAL(N) is unchanged for this many stages "
                 "(0: run to --max-n)")
      ->capture_default_str();
  app.add_option("--out", cfg.out_dir, "Output directory")
      ->capture_default_str();
  app.add_option("--emit", emit_csv,
                 "Comma-separated subset of "
                 "summary,solutions,plotdata,errors_table")
      ->capture_default_str();
  app.add_option("--threads", cfg.threads,
                 "Path-tracking worker threads (0: auto)")
      ->capture_default_str();
  app.add_flag("--quiet", cfg.quiet, "Suppress per-stage progress lines");

  app.add_option("--step-init", cfg.tracker.step_init, "Initial step in t")
      ->capture_default_str();
  app.add_option("--step-min", cfg.tracker.step_min, "Smallest step in t")
      ->capture_default_str();
  app.add_option("--step-max", cfg.tracker.step_max, "Largest step in t")
      ->capture_default_str();
  app.add_option("--newton-tol", cfg.tracker.newton_tol,
                 "Corrector residual tolerance")
      ->capture_default_str();
  app.add_option("--newton-max-iters", cfg.tracker.newton_max_iters,
                 "Newton iterations for the endpoint polish")
      ->capture_default_str();
  app.add_option("--max-steps", cfg.tracker.max_steps,
                 "Step budget per path")
      ->capture_default_str();
  app.add_option("--divergence-bound", cfg.tracker.divergence_bound,
                 "Declare a path divergent beyond this magnitude")
      ->capture_default_str();
  app.add_option("--endpoint-tol", cfg.tracker.endpoint_tol,
                 "Residual tolerance at t = 0")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (*lambda_opt) cfg.lambda = lambda;
  cfg.filter.kind = parse_filter(filter_name);
  cfg.emit = split_tokens(emit_csv);

  try {
    return polybvp::run_experiment(cfg);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
