#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

#include "polybvp/polynomial.hpp"
#include "polybvp/problem.hpp"
#include "polybvp/tridiagonal.hpp"

namespace polybvp {

struct DegenerateStart : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Frozen coefficients of one mesh-refinement homotopy step. The previous
/// stage had prev_interior unknowns; this stage deforms its solutions into
/// solutions with one more interior point as t runs from 1 to 0. gamma is a
/// random unit-modulus constant that keeps the paths nonsingular on (0,1].
struct HomotopyStage {
  double alpha = 0.0;
  double beta = 0.0;
  Polynomial p;
  Polynomial dp;
  Complex gamma{0.0, 1.0};
  double h0 = 0.0;  // coarse spacing (b-a)/(N+1)
  double h1 = 0.0;  // fine spacing (b-a)/(N+2)
  int prev_interior = 0;

  int unknowns() const { return prev_interior + 1; }
  Complex gamma2() const { return gamma * gamma; }

  // blend(1) = gamma^2, blend(0) = 1
  Complex blend(double t) const { return gamma2() * t + (1.0 - t); }
  // spacing(1) = gamma*h0, spacing(0) = h1
  Complex spacing(double t) const { return gamma * t * h0 + (1.0 - t) * h1; }
  // moving right-hand boundary value: y_last at t=0, gamma^2*beta at t=1
  Complex boundary_bridge(double t, const Complex& y_last) const {
    return (1.0 - t) * y_last + gamma2() * beta * t;
  }
};

inline HomotopyStage make_stage(const BvpProblem& prob, int prev_interior,
                                Complex gamma) {
  HomotopyStage s;
  s.alpha = prob.alpha;
  s.beta = prob.beta;
  s.p = prob.p;
  s.dp = derivative(prob.p);
  s.gamma = gamma;
  s.h0 = (prob.b - prob.a) / (prev_interior + 1);
  s.h1 = (prob.b - prob.a) / (prev_interior + 2);
  s.prev_interior = prev_interior;
  return s;
}

/// Unit-modulus gamma drawn from a seeded generator. The angle is sampled
/// from a band of small magnitudes, bounded away from zero: gamma = 1
/// reproduces the undeformed homotopy, whose paths can run into real
/// singular configurations, while a large angle rewires which start point
/// reaches which endpoint and breaks the real-parent/real-child pairing the
/// refinement relies on. A small complex twist dodges the singular moments
/// and keeps the natural assignment.
inline Complex random_unit_gamma(std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  const double u = (eng() >> 11) * 0x1.0p-53;
  const double sign = (eng() & 1) ? 1.0 : -1.0;
  const double angle = sign * (0.05 + 0.30 * u);
  return Complex(std::cos(angle), std::sin(angle));
}

/// The N+1 homotopy rows. y holds the unknowns y_1..y_{N+1}; y_0 = alpha is
/// substituted. Rows 1..N-1 are the deformed coarse stencil, row N couples
/// to the moving boundary value, row N+1 is the new point's stencil against
/// the fixed boundary.
inline CVector homotopy_residual(const HomotopyStage& s,
                                 const Eigen::Ref<const CVector>& y,
                                 double t) {
  const int n_prev = s.prev_interior;
  const Complex g = s.blend(t);
  const Complex h = s.spacing(t);
  const Complex h2 = h * h;
  CVector r(s.unknowns());
  for (int i = 1; i <= n_prev - 1; ++i) {
    const Complex left = i == 1 ? Complex(s.alpha) : y(i - 2);
    r(i - 1) = g * (left - 2.0 * y(i - 1) + y(i)) - h2 * eval(s.p, y(i - 1));
  }
  {
    const Complex left = n_prev == 1 ? Complex(s.alpha) : y(n_prev - 2);
    r(n_prev - 1) = g * (left - 2.0 * y(n_prev - 1)) +
                    s.boundary_bridge(t, y(n_prev)) -
                    h2 * eval(s.p, y(n_prev - 1));
  }
  r(n_prev) = g * (y(n_prev - 1) - 2.0 * y(n_prev) + s.beta) -
              h2 * eval(s.p, y(n_prev));
  return r;
}

/// Tridiagonal Jacobian in y. Row N's super-diagonal entry is (1-t): the
/// moving boundary value, not the stencil, carries the coupling to y_{N+1}.
inline Tridiagonal homotopy_jacobian(const HomotopyStage& s,
                                     const Eigen::Ref<const CVector>& y,
                                     double t) {
  const int m = s.unknowns();
  const Complex g = s.blend(t);
  const Complex h = s.spacing(t);
  const Complex h2 = h * h;
  Tridiagonal jac{CVector::Constant(m - 1, g), CVector(m),
                  CVector::Constant(m - 1, g)};
  for (int j = 0; j < m; ++j) jac.diag(j) = -2.0 * g - h2 * eval(s.dp, y(j));
  jac.upper(s.prev_interior - 1) = Complex(1.0 - t);
  return jac;
}

/// Analytic t-derivative of the homotopy rows, using blend'(t) = gamma^2 - 1,
/// spacing'(t) = gamma*h0 - h1 and d(h^2)/dt = 2 h h'.
inline CVector homotopy_t_derivative(const HomotopyStage& s,
                                     const Eigen::Ref<const CVector>& y,
                                     double t) {
  const int n_prev = s.prev_interior;
  const Complex gp = s.gamma2() - 1.0;
  const Complex hp = s.gamma * s.h0 - s.h1;
  const Complex dh2 = 2.0 * s.spacing(t) * hp;
  CVector r(s.unknowns());
  for (int i = 1; i <= n_prev - 1; ++i) {
    const Complex left = i == 1 ? Complex(s.alpha) : y(i - 2);
    r(i - 1) = gp * (left - 2.0 * y(i - 1) + y(i)) - dh2 * eval(s.p, y(i - 1));
  }
  {
    const Complex left = n_prev == 1 ? Complex(s.alpha) : y(n_prev - 2);
    r(n_prev - 1) = gp * (left - 2.0 * y(n_prev - 1)) +
                    (s.gamma2() * s.beta - y(n_prev)) -
                    dh2 * eval(s.p, y(n_prev - 1));
  }
  r(n_prev) = gp * (y(n_prev - 1) - 2.0 * y(n_prev) + s.beta) -
              dh2 * eval(s.p, y(n_prev));
  return r;
}

/// Ascending coefficients of the start polynomial in the new unknown z:
/// (y_N + beta) - 2 z - h0^2 p(z). Its d roots, appended to a previous-stage
/// solution whose last coordinate is y_prev_last, are the t=1 start points.
inline Eigen::VectorXcd start_coefficients(const HomotopyStage& s,
                                           const Complex& y_prev_last) {
  const int d = s.p.degree();
  const double h02 = s.h0 * s.h0;
  Eigen::VectorXcd c = (-h02 * s.p.coeffs).cast<Complex>();
  c(0) += y_prev_last + s.beta;
  c(1) -= 2.0;
  if (c(d) == Complex(0.0, 0.0))
    throw DegenerateStart("start polynomial lost its leading coefficient");
  return c;
}

}  // namespace polybvp
