#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace podrom {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kMachineEpsilon = 0x1p-52;

/// Tridiagonal n x n matrix stored by its three diagonals.
///
/// `lower(i)` is entry (i+1, i), `upper(i)` is entry (i, i+1).
class Tridiagonal {
 public:
  Tridiagonal() = default;
  explicit Tridiagonal(Eigen::Index n);
  Tridiagonal(Vector lower, Vector diag, Vector upper);

  Eigen::Index size() const { return diag_.size(); }

  const Vector& lower() const { return lower_; }
  const Vector& diag() const { return diag_; }
  const Vector& upper() const { return upper_; }
  Vector& lower() { return lower_; }
  Vector& diag() { return diag_; }
  Vector& upper() { return upper_; }

  double operator()(Eigen::Index i, Eigen::Index j) const;

  Vector operator*(const Vector& x) const;
  Matrix operator*(const Matrix& x) const;
  Tridiagonal operator+(const Tridiagonal& other) const;
  Tridiagonal operator*(double s) const;

  Matrix dense() const;

  /// Solves A x = b by Gaussian elimination with partial pivoting (gtsv
  /// scheme). Throws InvalidArgument on an exactly singular pivot.
  Vector solve(const Vector& b) const;

 private:
  Vector lower_;
  Vector diag_;
  Vector upper_;
};

/// Eigenpairs of a symmetric matrix, eigenvalues sorted in descending order.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;  // column i belongs to values(i)
};

/// Householder tridiagonalization followed by implicit QL iteration.
/// Only the lower triangle of `a` is read.
SymmetricEigen symmetric_eigen(const Matrix& a);

/// Thin singular value decomposition A = U diag(sigma) V^T with
/// k = min(rows, cols) singular triplets sorted descending.
struct ThinSvd {
  Matrix u;
  Vector sigma;
  Matrix v;
};

/// One-sided (Hestenes) Jacobi SVD. Small singular values are resolved to
/// high relative accuracy, which the Gram-matrix eigen routes cannot do.
ThinSvd jacobi_svd(const Matrix& a);

/// Symmetric square root and inverse square root of an SPD matrix.
struct SymmetricSqrt {
  Matrix sqrt;
  Matrix inv_sqrt;
};
SymmetricSqrt symmetric_sqrt(const Matrix& spd);

/// Fixes the sign of each column so that its first entry of largest
/// magnitude is positive. Returns the applied signs.
Vector canonicalize_signs(Matrix& columns);

}  // namespace podrom
