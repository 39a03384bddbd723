#include "podrom/linalg.hpp"

#include "podrom/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace podrom {

Tridiagonal::Tridiagonal(Eigen::Index n)
    : lower_(Vector::Zero(std::max<Eigen::Index>(n - 1, 0))),
      diag_(Vector::Zero(n)),
      upper_(Vector::Zero(std::max<Eigen::Index>(n - 1, 0))) {}

Tridiagonal::Tridiagonal(Vector lower, Vector diag, Vector upper)
    : lower_(std::move(lower)), diag_(std::move(diag)), upper_(std::move(upper)) {
  const auto off = std::max<Eigen::Index>(diag_.size() - 1, 0);
  if (lower_.size() != off || upper_.size() != off) {
    throw InvalidArgument("tridiagonal: inconsistent diagonal lengths");
  }
}

double Tridiagonal::operator()(Eigen::Index i, Eigen::Index j) const {
  if (i == j) return diag_(i);
  if (i == j + 1) return lower_(j);
  if (j == i + 1) return upper_(i);
  return 0.0;
}

Vector Tridiagonal::operator*(const Vector& x) const {
  const auto n = size();
  if (x.size() != n) throw InvalidArgument("tridiagonal product: size mismatch");
  Vector y = diag_.cwiseProduct(x);
  if (n > 1) {
    y.head(n - 1) += upper_.cwiseProduct(x.tail(n - 1));
    y.tail(n - 1) += lower_.cwiseProduct(x.head(n - 1));
  }
  return y;
}

Matrix Tridiagonal::operator*(const Matrix& x) const {
  const auto n = size();
  if (x.rows() != n) throw InvalidArgument("tridiagonal product: size mismatch");
  Matrix y = diag_.asDiagonal() * x;
  if (n > 1) {
    y.topRows(n - 1) += upper_.asDiagonal() * x.bottomRows(n - 1);
    y.bottomRows(n - 1) += lower_.asDiagonal() * x.topRows(n - 1);
  }
  return y;
}

Tridiagonal Tridiagonal::operator+(const Tridiagonal& other) const {
  if (other.size() != size()) throw InvalidArgument("tridiagonal sum: size mismatch");
  return {lower_ + other.lower_, diag_ + other.diag_, upper_ + other.upper_};
}

Tridiagonal Tridiagonal::operator*(double s) const {
  return {lower_ * s, diag_ * s, upper_ * s};
}

Matrix Tridiagonal::dense() const {
  const auto n = size();
  Matrix a = Matrix::Zero(n, n);
  a.diagonal() = diag_;
  if (n > 1) {
    a.diagonal(-1) = lower_;
    a.diagonal(1) = upper_;
  }
  return a;
}

Vector Tridiagonal::solve(const Vector& b) const {
  const auto n = size();
  if (b.size() != n) throw InvalidArgument("tridiagonal solve: size mismatch");
  if (n == 0) return b;
  // After elimination dl(i) holds the second superdiagonal fill-in of row i.
  Vector dl = lower_;
  Vector d = diag_;
  Vector du = upper_;
  Vector x = b;

  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (std::abs(d(i)) >= std::abs(dl(i))) {
      if (d(i) == 0.0) throw InvalidArgument("tridiagonal solve: singular matrix");
      const double fact = dl(i) / d(i);
      d(i + 1) -= fact * du(i);
      x(i + 1) -= fact * x(i);
      dl(i) = 0.0;
    } else {
      const double fact = d(i) / dl(i);
      d(i) = dl(i);
      const double tmp = d(i + 1);
      d(i + 1) = du(i) - fact * tmp;
      if (i + 2 < n) {
        dl(i) = du(i + 1);
        du(i + 1) = -fact * dl(i);
      } else {
        dl(i) = 0.0;
      }
      du(i) = tmp;
      const double xi = x(i);
      x(i) = x(i + 1);
      x(i + 1) = xi - fact * x(i + 1);
    }
  }
  if (d(n - 1) == 0.0) throw InvalidArgument("tridiagonal solve: singular matrix");

  x(n - 1) /= d(n - 1);
  if (n > 1) x(n - 2) = (x(n - 2) - du(n - 2) * x(n - 1)) / d(n - 2);
  for (Eigen::Index i = n - 3; i >= 0; --i) {
    x(i) = (x(i) - du(i) * x(i + 1) - dl(i) * x(i + 2)) / d(i);
  }
  return x;
}

namespace {

// Householder reduction of a symmetric matrix to tridiagonal form; on exit
// `v` holds the accumulated orthogonal transformation, `d` the diagonal and
// `e` the subdiagonal (e(0) unused).
void tridiagonalize(Matrix& v, Vector& d, Vector& e) {
  const Eigen::Index n = v.rows();
  for (Eigen::Index j = 0; j < n; ++j) d(j) = v(n - 1, j);

  for (Eigen::Index i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (Eigen::Index k = 0; k < i; ++k) scale += std::abs(d(k));
    if (scale == 0.0) {
      e(i) = d(i - 1);
      for (Eigen::Index j = 0; j < i; ++j) {
        d(j) = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (Eigen::Index k = 0; k < i; ++k) {
        d(k) /= scale;
        h += d(k) * d(k);
      }
      double f = d(i - 1);
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e(i) = scale * g;
      h -= f * g;
      d(i - 1) = f - g;
      for (Eigen::Index j = 0; j < i; ++j) e(j) = 0.0;

      for (Eigen::Index j = 0; j < i; ++j) {
        f = d(j);
        v(j, i) = f;
        g = e(j) + v(j, j) * f;
        for (Eigen::Index k = j + 1; k <= i - 1; ++k) {
          g += v(k, j) * d(k);
          e(k) += v(k, j) * f;
        }
        e(j) = g;
      }
      f = 0.0;
      for (Eigen::Index j = 0; j < i; ++j) {
        e(j) /= h;
        f += e(j) * d(j);
      }
      const double hh = f / (h + h);
      for (Eigen::Index j = 0; j < i; ++j) e(j) -= hh * d(j);
      for (Eigen::Index j = 0; j < i; ++j) {
        f = d(j);
        g = e(j);
        for (Eigen::Index k = j; k <= i - 1; ++k) v(k, j) -= (f * e(k) + g * d(k));
        d(j) = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d(i) = h;
  }

  for (Eigen::Index i = 0; i < n - 1; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d(i + 1);
    if (h != 0.0) {
      for (Eigen::Index k = 0; k <= i; ++k) d(k) = v(k, i + 1) / h;
      for (Eigen::Index j = 0; j <= i; ++j) {
        double g = 0.0;
        for (Eigen::Index k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (Eigen::Index k = 0; k <= i; ++k) v(k, j) -= g * d(k);
      }
    }
    for (Eigen::Index k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    d(j) = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e(0) = 0.0;
}

// Implicit QL iteration on the tridiagonal (d, e), accumulating into v.
void implicit_ql(Matrix& v, Vector& d, Vector& e) {
  const Eigen::Index n = v.rows();
  for (Eigen::Index i = 1; i < n; ++i) e(i - 1) = e(i);
  e(n - 1) = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const int max_iter = 60;
  for (Eigen::Index l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d(l)) + std::abs(e(l)));
    Eigen::Index m = l;
    while (m < n) {
      if (std::abs(e(m)) <= kMachineEpsilon * tst1) break;
      ++m;
    }
    if (m == n) m = n - 1;

    if (m > l) {
      int iter = 0;
      do {
        if (++iter > max_iter) {
          throw ConvergenceFailure("symmetric eigensolver: QL iteration stalled",
                                   std::abs(e(l)));
        }
        double g = d(l);
        double p = (d(l + 1) - g) / (2.0 * e(l));
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d(l) = e(l) / (p + r);
        d(l + 1) = e(l) * (p + r);
        const double dl1 = d(l + 1);
        double h = g - d(l);
        for (Eigen::Index i = l + 2; i < n; ++i) d(i) -= h;
        f += h;

        p = d(m);
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e(l + 1);
        double s = 0.0, s2 = 0.0;
        for (Eigen::Index i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e(i);
          h = c * p;
          r = std::hypot(p, e(i));
          e(i + 1) = s * r;
          s = e(i) / r;
          c = p / r;
          p = c * d(i) - s * g;
          d(i + 1) = h + s * (c * g + s * d(i));
          for (Eigen::Index k = 0; k < n; ++k) {
            h = v(k, i + 1);
            v(k, i + 1) = s * v(k, i) + c * h;
            v(k, i) = c * v(k, i) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e(l) / dl1;
        e(l) = s * p;
        d(l) = c * p;
      } while (std::abs(e(l)) > kMachineEpsilon * tst1);
    }
    d(l) += f;
    e(l) = 0.0;
  }
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("symmetric_eigen: matrix not square");
  if (!a.allFinite()) throw InvalidArgument("symmetric_eigen: nonfinite entries");
  const Eigen::Index n = a.rows();
  SymmetricEigen out;
  if (n == 0) return out;

  Matrix v = a.triangularView<Eigen::Lower>();
  v.triangularView<Eigen::StrictlyUpper>() = v.transpose();
  Vector d(n), e(n);
  tridiagonalize(v, d, e);
  implicit_ql(v, d, e);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return d(x) > d(y); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = d(order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

namespace {

// Works on a tall matrix (rows >= cols).
ThinSvd jacobi_svd_tall(const Matrix& a) {
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  Matrix u = a;
  Matrix v = Matrix::Identity(cols, cols);
  Vector norms(cols);
  for (Eigen::Index j = 0; j < cols; ++j) norms(j) = u.col(j).squaredNorm();

  const double tol = kMachineEpsilon * static_cast<double>(rows);
  const int max_sweeps = 80;
  bool rotated = true;
  for (int sweep = 0; sweep < max_sweeps && rotated; ++sweep) {
    rotated = false;
    for (Eigen::Index i = 0; i + 1 < cols; ++i) {
      for (Eigen::Index j = i + 1; j < cols; ++j) {
        const double alpha = norms(i);
        const double beta = norms(j);
        if (alpha == 0.0 || beta == 0.0) continue;
        const double gamma = u.col(i).dot(u.col(j));
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (Eigen::Index k = 0; k < rows; ++k) {
          const double ui = u(k, i);
          const double uj = u(k, j);
          u(k, i) = c * ui - s * uj;
          u(k, j) = s * ui + c * uj;
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
          const double vi = v(k, i);
          const double vj = v(k, j);
          v(k, i) = c * vi - s * vj;
          v(k, j) = s * vi + c * vj;
        }
        norms(i) = u.col(i).squaredNorm();
        norms(j) = u.col(j).squaredNorm();
      }
    }
    if (sweep + 1 == max_sweeps && rotated) {
      throw ConvergenceFailure("jacobi_svd: sweeps exhausted", 0.0);
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(cols));
  std::iota(order.begin(), order.end(), 0);
  Vector sigma(cols);
  for (Eigen::Index j = 0; j < cols; ++j) sigma(j) = u.col(j).norm();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return sigma(x) > sigma(y); });

  ThinSvd out;
  out.u.resize(rows, cols);
  out.v.resize(cols, cols);
  out.sigma.resize(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const auto src = order[static_cast<std::size_t>(j)];
    out.sigma(j) = sigma(src);
    out.v.col(j) = v.col(src);
    if (sigma(src) > 0.0) {
      out.u.col(j) = u.col(src) / sigma(src);
    } else {
      out.u.col(j).setZero();
    }
  }
  return out;
}

}  // namespace

ThinSvd jacobi_svd(const Matrix& a) {
  if (!a.allFinite()) throw InvalidArgument("jacobi_svd: nonfinite entries");
  if (a.rows() >= a.cols()) return jacobi_svd_tall(a);
  ThinSvd t = jacobi_svd_tall(a.transpose());
  std::swap(t.u, t.v);
  return t;
}

SymmetricSqrt symmetric_sqrt(const Matrix& spd) {
  const SymmetricEigen eig = symmetric_eigen(spd);
  if (eig.values.size() > 0 && eig.values.minCoeff() <= 0.0) {
    throw InvalidArgument("symmetric_sqrt: matrix is not positive definite");
  }
  const Vector root = eig.values.cwiseSqrt();
  SymmetricSqrt out;
  out.sqrt = eig.vectors * root.asDiagonal() * eig.vectors.transpose();
  out.inv_sqrt = eig.vectors * root.cwiseInverse().asDiagonal() * eig.vectors.transpose();
  return out;
}

Vector canonicalize_signs(Matrix& columns) {
  Vector signs = Vector::Ones(columns.cols());
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < columns.rows(); ++i) {
      // strict comparison keeps the first entry among equal magnitudes
      if (std::abs(columns(i, j)) > best * (1.0 + 1e-12)) {
        best = std::abs(columns(i, j));
        arg = i;
      }
    }
    if (columns.rows() > 0 && columns(arg, j) < 0.0) {
      columns.col(j) = -columns.col(j);
      signs(j) = -1.0;
    }
  }
  return signs;
}

}  // namespace podrom
