#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>

namespace polybvp {

/// Tridiagonal complex matrix. diag holds the n diagonal entries; lower(i)
/// couples row i+1 to column i and upper(i) couples row i to column i+1.
struct Tridiagonal {
  Eigen::VectorXcd lower;
  Eigen::VectorXcd diag;
  Eigen::VectorXcd upper;

  int size() const { return static_cast<int>(diag.size()); }
};

inline Eigen::MatrixXcd to_dense(const Tridiagonal& m) {
  const int n = m.size();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = m.diag(i);
    if (i > 0) a(i, i - 1) = m.lower(i - 1);
    if (i < n - 1) a(i, i + 1) = m.upper(i);
  }
  return a;
}

/// Thomas elimination without pivoting, O(n). A pivot whose magnitude falls
/// below pivot_floor signals near-singularity; the solve then falls back to
/// a dense partial-pivot LU.
inline Eigen::VectorXcd solve(const Tridiagonal& m,
                              const Eigen::Ref<const Eigen::VectorXcd>& rhs,
                              double pivot_floor = 1e-13) {
  const int n = m.size();
  Eigen::VectorXcd c_prime(std::max(n - 1, 0));
  Eigen::VectorXcd d_prime(n);

  std::complex<double> pivot = m.diag(0);
  bool degenerate = std::abs(pivot) < pivot_floor;
  if (!degenerate) {
    if (n > 1) c_prime(0) = m.upper(0) / pivot;
    d_prime(0) = rhs(0) / pivot;
    for (int i = 1; i < n; ++i) {
      pivot = m.diag(i) - m.lower(i - 1) * c_prime(i - 1);
      if (std::abs(pivot) < pivot_floor) {
        degenerate = true;
        break;
      }
      if (i < n - 1) c_prime(i) = m.upper(i) / pivot;
      d_prime(i) = (rhs(i) - m.lower(i - 1) * d_prime(i - 1)) / pivot;
    }
  }
  if (degenerate) return to_dense(m).partialPivLu().solve(rhs);

  Eigen::VectorXcd x(n);
  x(n - 1) = d_prime(n - 1);
  for (int i = n - 2; i >= 0; --i) x(i) = d_prime(i) - c_prime(i) * x(i + 1);
  return x;
}

}  // namespace polybvp
