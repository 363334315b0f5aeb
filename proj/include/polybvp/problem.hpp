#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "polybvp/polynomial.hpp"
#include "polybvp/tridiagonal.hpp"

namespace polybvp {

using CVector = Eigen::VectorXcd;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingExactSolution : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Two-point boundary value problem y'' = p(y) on [a,b] with y(a) = alpha
/// and y(b) = beta. exact_solution is optional and only used when reporting
/// errors against a known closed form.
struct BvpProblem {
  std::string name;
  double a = 0.0;
  double b = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  Polynomial p;
  std::function<double(double)> exact_solution;
};

inline void validate(const BvpProblem& prob) {
  if (!(prob.b > prob.a))
    throw ValidationError(prob.name + ": requires b > a");
  if (prob.p.degree() < 1)
    throw ValidationError(prob.name + ": nonlinearity must have degree >= 1");
}

/// Uniform mesh with `interior` interior points: node(0) = a,
/// node(interior+1) = b, spacing h = (b-a)/(interior+1).
struct Mesh {
  double a = 0.0;
  double h = 0.0;
  int interior = 0;

  double node(int i) const { return a + i * h; }
};

inline Mesh mesh_for(const BvpProblem& prob, int interior) {
  return Mesh{prob.a, (prob.b - prob.a) / (interior + 1), interior};
}

/// One point of the discrete solution set: complex values at the interior
/// mesh nodes, a realness flag, and the stage/path it came from.
struct SolutionVector {
  CVector values;
  bool is_real = false;
  int stage = 0;
  int path = -1;

  int n() const { return static_cast<int>(values.size()); }
};

/// Central-difference residual r_i = y_{i-1} - 2 y_i + y_{i+1} - h^2 p(y_i)
/// for i = 1..N, with y_0 = alpha and y_{N+1} = beta substituted.
inline CVector residual(const BvpProblem& prob,
                        const Eigen::Ref<const CVector>& y) {
  const int n = static_cast<int>(y.size());
  const double h = (prob.b - prob.a) / (n + 1);
  const double h2 = h * h;
  CVector r(n);
  for (int i = 0; i < n; ++i) {
    const Complex left = i == 0 ? Complex(prob.alpha) : y(i - 1);
    const Complex right = i == n - 1 ? Complex(prob.beta) : y(i + 1);
    r(i) = left - 2.0 * y(i) + right - h2 * eval(prob.p, y(i));
  }
  return r;
}

/// Jacobian of the residual: unit sub/super diagonals and
/// -2 - h^2 p'(y_i) on the diagonal.
inline Tridiagonal jacobian(const BvpProblem& prob,
                            const Eigen::Ref<const CVector>& y) {
  const int n = static_cast<int>(y.size());
  const double h = (prob.b - prob.a) / (n + 1);
  const double h2 = h * h;
  const Polynomial dp = derivative(prob.p);
  Tridiagonal jac{CVector::Ones(std::max(n - 1, 0)), CVector(n),
                  CVector::Ones(std::max(n - 1, 0))};
  for (int i = 0; i < n; ++i) jac.diag(i) = -2.0 - h2 * eval(dp, y(i));
  return jac;
}

/// Largest deviation of Re(y_i) from the registered closed-form solution at
/// the interior mesh nodes.
inline double max_error_vs_exact(const BvpProblem& prob,
                                 const SolutionVector& y) {
  if (!prob.exact_solution)
    throw MissingExactSolution(prob.name + ": no closed-form solution");
  const Mesh mesh = mesh_for(prob, y.n());
  double worst = 0.0;
  for (int i = 0; i < y.n(); ++i)
    worst = std::max(worst, std::abs(y.values(i).real() -
                                     prob.exact_solution(mesh.node(i + 1))));
  return worst;
}

// ---------------------------------------------------------------------------
// Benchmark presets.

inline BvpProblem preset_bvp2() {
  BvpProblem prob{"bvp2", 0.0, 1.0, 0.5, 1.0 / 3.0, Polynomial{0, 0, 0, 2},
                  [](double x) { return 1.0 / (x + 2.0); }};
  return prob;
}

inline void require_positive_lambda(const std::string& name, double lambda) {
  if (!(lambda > 0.0))
    throw ValidationError(name + ": requires lambda > 0");
}

inline BvpProblem preset_bvp3(double lambda) {
  require_positive_lambda("bvp3", lambda);
  return {"bvp3", 0.0, 1.0, 0.0, 0.0, Polynomial{-lambda, 0.0, -lambda}, {}};
}

inline BvpProblem preset_bvp4(double lambda) {
  require_positive_lambda("bvp4", lambda);
  return {"bvp4", 0.0, 1.0, 0.0, 0.0, Polynomial{0.0, 0.0, 0.0, -lambda}, {}};
}

inline BvpProblem preset_duffing3(double lambda) {
  require_positive_lambda("duffing3", lambda);
  return {"duffing3", 0.0, 1.0, 0.0, 0.0,
          Polynomial{0.0, -lambda, 0.0, lambda / 6.0}, {}};
}

inline BvpProblem preset_duffing5(double lambda) {
  require_positive_lambda("duffing5", lambda);
  return {"duffing5", 0.0, 1.0, 0.0, 0.0,
          Polynomial{0.0, -lambda, 0.0, lambda / 6.0, 0.0, -lambda / 120.0},
          {}};
}

inline BvpProblem preset_bratu2(double lambda) {
  require_positive_lambda("bratu2", lambda);
  return {"bratu2", 0.0, 1.0, 0.0, 0.0,
          Polynomial{-lambda, -lambda, -lambda / 2.0}, {}};
}

inline std::vector<std::string> preset_names() {
  return {"bvp2", "bvp3", "bvp4", "duffing3", "duffing5", "bratu2"};
}

inline bool is_preset(const std::string& name) {
  for (const auto& p : preset_names())
    if (p == name) return true;
  return false;
}

inline bool preset_takes_lambda(const std::string& name) {
  return name != "bvp2";
}

inline BvpProblem make_preset(const std::string& name,
                              std::optional<double> lambda) {
  if (name == "bvp2") {
    if (lambda) throw ValidationError("bvp2: takes no lambda");
    return preset_bvp2();
  }
  if (!lambda) throw ValidationError(name + ": requires --lambda");
  if (name == "bvp3") return preset_bvp3(*lambda);
  if (name == "bvp4") return preset_bvp4(*lambda);
  if (name == "duffing3") return preset_duffing3(*lambda);
  if (name == "duffing5") return preset_duffing5(*lambda);
  if (name == "bratu2") return preset_bratu2(*lambda);
  throw ValidationError("unknown preset: " + name);
}

}  // namespace polybvp
