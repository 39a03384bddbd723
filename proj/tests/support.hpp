#pragma once

// Random instances and dense oracles shared by the unit tests.

#include "podrom/linalg.hpp"

#include <random>

namespace podrom::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = normal(rng);
  return a;
}

/// SPD matrix with eigenvalues in [1, cond].
inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index n, double cond = 10.0) {
  const Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, n, n));
  const Matrix q = qr.householderQ();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = std::pow(cond, u(rng));
  Matrix a = q * d.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

inline Vector random_positive(std::mt19937_64& rng, Eigen::Index n, double lo = 0.5,
                              double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

/// Strictly increasing nodes on [a, b] with `interior` random interior points.
inline std::vector<double> random_nodes(std::mt19937_64& rng, double a, double b,
                                        int interior) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> gaps(static_cast<std::size_t>(interior) + 1);
  double total = 0.0;
  for (auto& g : gaps) total += (g = u(rng));
  std::vector<double> nodes{a};
  double acc = 0.0;
  for (int i = 0; i < interior; ++i) {
    acc += gaps[static_cast<std::size_t>(i)];
    nodes.push_back(a + (b - a) * acc / total);
  }
  nodes.push_back(b);
  return nodes;
}

inline double max_rel_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

}  // namespace podrom::testing
