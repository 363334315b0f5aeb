#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace polybvp {

using Complex = std::complex<double>;

/// Thrown when an iterative solve fails to reach its tolerance within the
/// iteration cap.
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Real-coefficient univariate polynomial, stored as ascending coefficients
/// c_0..c_d. Trailing zero coefficients are trimmed on construction, so the
/// degree is the index of the last nonzero coefficient (the zero polynomial
/// keeps a single zero coefficient).
struct Polynomial {
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(1);

  Polynomial() = default;
  explicit Polynomial(Eigen::VectorXd c) : coeffs(std::move(c)) { trim(); }
  Polynomial(std::initializer_list<double> c)
      : coeffs(Eigen::Map<const Eigen::VectorXd>(
            c.begin(), static_cast<Eigen::Index>(c.size()))) {
    trim();
  }

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  bool is_zero() const { return degree() == 0 && coeffs(0) == 0.0; }

 private:
  void trim() {
    if (coeffs.size() == 0) coeffs = Eigen::VectorXd::Zero(1);
    Eigen::Index last = coeffs.size() - 1;
    while (last > 0 && coeffs(last) == 0.0) --last;
    coeffs.conservativeResize(last + 1);
  }
};

/// Horner evaluation; the scalar may be real or complex.
template <class Scalar>
Scalar eval(const Polynomial& p, const Scalar& z) {
  Scalar acc = Scalar(p.coeffs(p.degree()));
  for (int k = p.degree() - 1; k >= 0; --k) acc = acc * z + Scalar(p.coeffs(k));
  return acc;
}

/// Horner evaluation of a complex-coefficient polynomial (ascending order).
inline Complex eval(const Eigen::VectorXcd& coeffs, const Complex& z) {
  Complex acc = coeffs(coeffs.size() - 1);
  for (Eigen::Index k = coeffs.size() - 2; k >= 0; --k) acc = acc * z + coeffs(k);
  return acc;
}

inline Polynomial derivative(const Polynomial& p) {
  if (p.degree() == 0) return Polynomial{};
  Eigen::VectorXd d(p.degree());
  for (int k = 1; k <= p.degree(); ++k) d(k - 1) = k * p.coeffs(k);
  return Polynomial(std::move(d));
}

inline Eigen::VectorXcd derivative_coeffs(const Eigen::VectorXcd& c) {
  if (c.size() <= 1) return Eigen::VectorXcd::Zero(1);
  Eigen::VectorXcd d(c.size() - 1);
  for (Eigen::Index k = 1; k < c.size(); ++k) d(k - 1) = double(k) * c(k);
  return d;
}

namespace detail {

/// Horner value of the magnitude polynomial sum |c_k| |z|^k, the natural
/// scale for the rounding error of evaluating p at z.
inline double eval_magnitude(const Eigen::VectorXcd& coeffs, double r) {
  double acc = std::abs(coeffs(coeffs.size() - 1));
  for (Eigen::Index k = coeffs.size() - 2; k >= 0; --k)
    acc = acc * r + std::abs(coeffs(k));
  return acc;
}

}  // namespace detail

/// All d roots of a degree-d complex-coefficient polynomial by simultaneous
/// Aberth-Ehrlich iteration, started on a circle just outside the Cauchy
/// bound. Roots come back sorted by real part, then imaginary part; multiple
/// roots appear as numerically clustered values. A root counts as converged
/// once |p(z)| <= tol * (1 + max |c_k|), or once it reaches the rounding
/// floor of Horner evaluation at that magnitude.
inline Eigen::VectorXcd all_roots(Eigen::VectorXcd c, double tol = 1e-12,
                                  int max_sweeps = 200) {
  Eigen::Index last = c.size() - 1;
  while (last > 0 && c(last) == Complex(0.0, 0.0)) --last;
  c.conservativeResize(last + 1);
  const int d = static_cast<int>(c.size()) - 1;
  if (d < 1)
    throw std::invalid_argument("all_roots: polynomial degree must be >= 1");

  // exactly-zero low-order coefficients factor out as roots at the origin
  int zeros = 0;
  while (zeros < d && c(zeros) == Complex(0.0, 0.0)) ++zeros;
  const int m = d - zeros;
  const Eigen::VectorXcd reduced = c.segment(zeros, m + 1);

  const double res_tol = tol * (1.0 + c.cwiseAbs().maxCoeff());
  const double eval_floor =
      (4.0 * m + 4.0) * std::numeric_limits<double>::epsilon();
  auto settled = [&](const Complex& z, const Complex& pz) {
    return std::abs(pz) <= res_tol ||
           std::abs(pz) <=
               eval_floor * detail::eval_magnitude(reduced, std::abs(z));
  };

  Eigen::VectorXcd roots(d);
  int out = 0;
  for (; out < zeros; ++out) roots(out) = Complex(0.0, 0.0);

  if (m == 1) {
    roots(out++) = -reduced(0) / reduced(1);
  } else if (m >= 2) {
    const double bound =
        1.0 + reduced.head(m).cwiseAbs().maxCoeff() / std::abs(reduced(m));
    Eigen::VectorXcd z(m);
    for (int j = 0; j < m; ++j) {
      const double angle = 2.0 * std::numbers::pi * j / m + 0.4;
      z(j) = bound * Complex(std::cos(angle), std::sin(angle));
    }
    const Eigen::VectorXcd dc = derivative_coeffs(reduced);
    bool done = false;
    for (int sweep = 0; sweep < max_sweeps && !done; ++sweep) {
      done = true;
      for (int j = 0; j < m; ++j) {
        const Complex pz = eval(reduced, z(j));
        if (settled(z(j), pz)) continue;
        done = false;
        const Complex dpz = eval(dc, z(j));
        if (dpz == Complex(0.0, 0.0)) {  // sitting on a critical point
          z(j) *= Complex(1.0 + 1e-8, 1e-8);
          continue;
        }
        const Complex newton = pz / dpz;
        Complex repulsion(0.0, 0.0);
        bool collided = false;
        for (int k = 0; k < m; ++k) {
          if (k == j) continue;
          const Complex gap = z(j) - z(k);
          if (gap == Complex(0.0, 0.0)) {
            collided = true;
            break;
          }
          repulsion += 1.0 / gap;
        }
        if (collided) {
          z(j) += 1e-10 * (1.0 + std::abs(z(j)));
          continue;
        }
        const Complex denom = 1.0 - newton * repulsion;
        Complex step = denom == Complex(0.0, 0.0) ? newton : newton / denom;
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag()))
          step = newton;
        z(j) -= step;
      }
    }
    for (int j = 0; j < m; ++j) {
      if (!settled(z(j), eval(reduced, z(j))))
        throw NonConvergence("all_roots: iteration did not reach tolerance");
      roots(out++) = z(j);
    }
  }

  std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

inline Eigen::VectorXcd all_roots(const Polynomial& p, double tol = 1e-12,
                                  int max_sweeps = 200) {
  return all_roots(p.coeffs.cast<Complex>().eval(), tol, max_sweeps);
}

}  // namespace polybvp
