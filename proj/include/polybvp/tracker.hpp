#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <utility>

#include "polybvp/homotopy.hpp"
#include "polybvp/problem.hpp"
#include "polybvp/tridiagonal.hpp"

namespace polybvp {

struct TrackerConfig {
  double step_init = 1e-2;
  double step_min = 1e-7;
  double step_max = 0.1;
  double newton_tol = 1e-10;   // in-step corrector tolerance
  int corrector_iters = 3;     // Newton iterations per corrector attempt
  int newton_max_iters = 10;   // final polish at t = 0
  int max_steps = 10000;
  double divergence_bound = 1e8;
  double endpoint_tol = 1e-10;
  int grow_after = 4;          // consecutive successes before step growth
  double grow_factor = 1.5;
};

enum class PathStatus { Converged, Diverged, StepFailure, MaxSteps };

inline const char* to_string(PathStatus s) {
  switch (s) {
    case PathStatus::Converged: return "converged";
    case PathStatus::Diverged: return "diverged";
    case PathStatus::StepFailure: return "step_failure";
    case PathStatus::MaxSteps: return "max_steps";
  }
  return "unknown";
}

struct PathResult {
  PathStatus status = PathStatus::StepFailure;
  SolutionVector endpoint;  // meaningful only when status == Converged
  int steps_taken = 0;
  int start_index = -1;
};

namespace detail {

/// Newton iteration on the homotopy at frozen t. Returns true once the
/// residual max-norm drops to tol within max_iters updates.
inline bool correct(const HomotopyStage& stage, CVector& y, double t,
                    double tol, int max_iters) {
  for (int k = 0;; ++k) {
    const CVector r = homotopy_residual(stage, y, t);
    if (!r.allFinite()) return false;
    if (r.cwiseAbs().maxCoeff() <= tol) return true;
    if (k == max_iters) return false;
    y -= solve(homotopy_jacobian(stage, y, t), r);
    if (!y.allFinite()) return false;
  }
}

}  // namespace detail

/// Continues one t=1 solution of the stage homotopy to t=0 with an Euler
/// predictor and Newton corrector, halving the step on corrector failure and
/// growing it after repeated successes. A step is also rejected when the
/// corrector moves further than half the predicted displacement: a large
/// correction means the predictor left the path's tube, the situation in
/// which paths get crossed. Ends with a full-tolerance polish.
inline PathResult track_path(const HomotopyStage& stage,
                             const Eigen::Ref<const CVector>& start,
                             const TrackerConfig& cfg) {
  PathResult result;
  CVector y = start;
  double t = 1.0;
  double dt = cfg.step_init;
  int consecutive = 0;

  while (t > 0.0) {
    if (result.steps_taken >= cfg.max_steps) {
      result.status = PathStatus::MaxSteps;
      return result;
    }
    const double dt_eff = std::min(dt, t);
    const double t_next = dt_eff >= t ? 0.0 : t - dt_eff;

    // path tangent: dy/dt = -J^{-1} dH/dt, and t decreases by dt_eff
    const CVector tangent = solve(homotopy_jacobian(stage, y, t),
                                  homotopy_t_derivative(stage, y, t));
    const CVector predicted = y + dt_eff * tangent;
    CVector candidate = predicted;
    ++result.steps_taken;

    bool accepted = predicted.allFinite() &&
                    detail::correct(stage, candidate, t_next, cfg.newton_tol,
                                    cfg.corrector_iters);
    if (accepted) {
      const double pred_disp = dt_eff * tangent.cwiseAbs().maxCoeff();
      const double corr_disp = (candidate - predicted).cwiseAbs().maxCoeff();
      accepted = corr_disp <=
                 std::max(0.5 * pred_disp,
                          1e-12 * (1.0 + y.cwiseAbs().maxCoeff()));
    }
    if (accepted) {
      y = std::move(candidate);
      t = t_next;
      if (y.cwiseAbs().maxCoeff() > cfg.divergence_bound) {
        result.status = PathStatus::Diverged;
        return result;
      }
      if (++consecutive >= cfg.grow_after) {
        dt = std::min(dt * cfg.grow_factor, cfg.step_max);
        consecutive = 0;
      }
    } else {
      consecutive = 0;
      dt *= 0.5;
      if (dt < cfg.step_min) {
        result.status = PathStatus::StepFailure;
        return result;
      }
    }
  }

  if (!detail::correct(stage, y, 0.0, cfg.endpoint_tol,
                       cfg.newton_max_iters)) {
    result.status = PathStatus::StepFailure;
    return result;
  }
  if (y.cwiseAbs().maxCoeff() > cfg.divergence_bound) {
    result.status = PathStatus::Diverged;
    return result;
  }
  // sharpen toward machine precision so that downstream comparisons
  // (dedup, realness, symmetry) see the endpoint, not corrector noise
  for (int extra = 0; extra < 3; ++extra) {
    const CVector r = homotopy_residual(stage, y, 0.0);
    const double norm = r.cwiseAbs().maxCoeff();
    if (norm <= 1e-14) break;
    CVector next = y - solve(homotopy_jacobian(stage, y, 0.0), r);
    if (!next.allFinite() ||
        homotopy_residual(stage, next, 0.0).cwiseAbs().maxCoeff() >= norm)
      break;
    y = std::move(next);
  }
  result.status = PathStatus::Converged;
  result.endpoint = SolutionVector{std::move(y), false, stage.unknowns(), -1};
  return result;
}

/// Newton polish on the discretized system itself. Throws NonConvergence if
/// the input was not in a basin.
inline SolutionVector newton_refine(const BvpProblem& prob,
                                    const SolutionVector& initial,
                                    double tol = 1e-12, int max_iters = 30) {
  SolutionVector out = initial;
  CVector& y = out.values;
  for (int k = 0;; ++k) {
    const CVector r = residual(prob, y);
    if (r.allFinite() && r.cwiseAbs().maxCoeff() <= tol) return out;
    if (k == max_iters) break;
    y -= solve(jacobian(prob, y), r);
    if (!y.allFinite()) break;
  }
  throw NonConvergence(prob.name + ": Newton refinement stalled");
}

}  // namespace polybvp
