#include "podrom/error.hpp"
#include "podrom/mesh.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace podrom {
namespace {

// Independent element-level oracle: hats and slopes sampled at 3-point Gauss
// nodes on each element, accumulated into dense matrices over all nodes.
struct DenseOracle {
  Matrix mass, stiffness, advection;
};

DenseOracle gauss_oracle(const std::vector<double>& x) {
  const double g[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const double w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const auto n = static_cast<Eigen::Index>(x.size());
  DenseOracle o{Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n)};
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double xl = x[static_cast<std::size_t>(k)];
    const double xr = x[static_cast<std::size_t>(k) + 1];
    const double h = xr - xl;
    for (int q = 0; q < 3; ++q) {
      const double p = 0.5 * (xl + xr) + 0.5 * h * g[q];
      const double val[2] = {(xr - p) / h, (p - xl) / h};
      const double der[2] = {-1.0 / h, 1.0 / h};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const double wq = 0.5 * h * w[q];
          o.mass(k + i, k + j) += wq * val[i] * val[j];
          o.stiffness(k + i, k + j) += wq * der[i] * der[j];
          o.advection(k + i, k + j) += wq * der[j] * val[i];
        }
    }
  }
  return o;
}

TEST(BuildGrid, UniformExamples) {
  const Grid1D g = build_grid(0.0, 2.0, 3);
  const std::vector<double> expected{0.0, 0.5, 1.0, 1.5, 2.0};
  ASSERT_EQ(g.nodes().size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_DOUBLE_EQ(g.nodes()[i], expected[i]);
  const Grid1D fine = build_grid(0.0, 2.0, 499);
  EXPECT_NEAR(fine.h(0), 0.004, 1e-15);
  EXPECT_NEAR(fine.h(250), 0.004, 1e-15);
  EXPECT_EQ(fine.b(), 2.0);
}

TEST(BuildGrid, RejectsBadInput) {
  EXPECT_THROW(build_grid(0.0, 1.0, 0), InvalidArgument);
  EXPECT_THROW(build_grid(0.0, 1.0, -3), InvalidArgument);
  EXPECT_THROW(build_grid(1.0, 1.0, 4), InvalidArgument);
  EXPECT_THROW(Grid1D({0.0, 1.0}), InvalidArgument);
  EXPECT_THROW(Grid1D({0.0, 0.5, 0.5, 1.0}), InvalidArgument);
}

TEST(Grid1D, LocateAndEvaluate) {
  const Grid1D g({0.0, 0.2, 1.0});
  EXPECT_EQ(g.locate(0.0), 0);
  EXPECT_EQ(g.locate(0.2), 1);
  EXPECT_EQ(g.locate(1.0), 1);
  Vector v(3);
  v << 1.0, 3.0, -1.0;
  EXPECT_DOUBLE_EQ(g.evaluate(v, 0.1), 2.0);
  EXPECT_DOUBLE_EQ(g.evaluate(v, 0.6), 1.0);
}

TEST(Assemble, UniformClosedForms) {
  const Grid1D g = build_grid(0.0, 1.0, 9);
  const double h = 0.1;
  const FeMatrices fe = assemble(g, BoundaryKind::Dirichlet);
  ASSERT_EQ(fe.mass.size(), 9);
  for (Eigen::Index i = 0; i < 9; ++i) {
    EXPECT_NEAR(fe.mass.diag()(i), 2.0 * h / 3.0, 1e-15);
    EXPECT_NEAR(fe.stiffness.diag()(i), 2.0 / h, 1e-12);
    EXPECT_NEAR(fe.advection.diag()(i), 0.0, 1e-15);
  }
  for (Eigen::Index i = 0; i < 8; ++i) {
    EXPECT_NEAR(fe.mass.upper()(i), h / 6.0, 1e-15);
    EXPECT_NEAR(fe.stiffness.upper()(i), -1.0 / h, 1e-12);
    EXPECT_NEAR(fe.advection.upper()(i), 0.5, 1e-15);
    EXPECT_NEAR(fe.advection.lower()(i), -0.5, 1e-15);
  }
}

TEST(Assemble, NonuniformMatchesGaussOracle) {
  const std::vector<double> x{0.0, 0.2, 1.0};
  const FeMatrices fe = assemble(Grid1D(x), BoundaryKind::Robin);
  const DenseOracle o = gauss_oracle(x);
  EXPECT_NEAR(fe.mass(1, 1), (0.2 + 0.8) / 3.0, 1e-15);
  EXPECT_LT(testing::max_rel_diff(fe.mass.dense(), o.mass), 1e-12);
  EXPECT_LT(testing::max_rel_diff(fe.stiffness.dense(), o.stiffness), 1e-12);
  EXPECT_LT(testing::max_rel_diff(fe.advection.dense(), o.advection), 1e-12);
}

TEST(Assemble, RandomGridsMatchOracleAndInvariants) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = testing::random_nodes(rng, -1.0, 2.0, 5 + 4 * trial);
    const Grid1D g(x);
    const DenseOracle o = gauss_oracle(x);
    const auto n = static_cast<Eigen::Index>(x.size());
    const FeMatrices fe = assemble(g, BoundaryKind::Dirichlet);
    EXPECT_LT(testing::max_rel_diff(fe.mass.dense(), o.mass.block(1, 1, n - 2, n - 2)), 1e-12);
    EXPECT_LT(testing::max_rel_diff(fe.stiffness.dense(), o.stiffness.block(1, 1, n - 2, n - 2)),
              1e-12);
    EXPECT_LT(testing::max_rel_diff(fe.advection.dense(), o.advection.block(1, 1, n - 2, n - 2)),
              1e-12);

    const Matrix m = fe.mass.dense();
    const Matrix s = fe.stiffness.dense();
    EXPECT_LE((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-14 * m.cwiseAbs().maxCoeff());
    EXPECT_LE((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-14 * s.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      double off = 0.0;
      for (Eigen::Index j = 0; j < m.cols(); ++j) off += i == j ? 0.0 : std::abs(m(i, j));
      EXPECT_GT(m(i, i) - off, 0.0);
    }
    for (int r = 0; r < 100; ++r) {
      const Vector v = testing::random_matrix(rng, s.rows(), 1).col(0);
      EXPECT_GE(v.dot(s * v), -1e-12 * v.squaredNorm());
    }
  }
}

TEST(Assemble, MassNormIsL2Norm) {
  std::mt19937_64 rng(6);
  const auto x = testing::random_nodes(rng, 0.0, 1.0, 30);
  const Grid1D g(x);
  const Vector v = testing::random_matrix(rng, 32, 1).col(0);
  const FeMatrices fe = assemble(g, BoundaryKind::Robin);
  // Composite Simpson on 10 subintervals per element integrates v^2 exactly.
  double dense = 0.0;
  for (Eigen::Index k = 0; k < g.num_elements(); ++k) {
    const int sub = 10;
    const double step = g.h(k) / sub;
    for (int s = 0; s < sub; ++s) {
      const double a = g.node(k) + s * step;
      auto f = [&](double p) {
        const double t = (p - g.node(k)) / g.h(k);
        const double val = (1 - t) * v(k) + t * v(k + 1);
        return val * val;
      };
      dense += step / 6.0 * (f(a) + 4.0 * f(a + 0.5 * step) + f(a + step));
    }
  }
  EXPECT_NEAR(v.dot(fe.mass * v), dense, 1e-10 * dense);
}

ModelProblem heat_problem(std::function<double(double, double)> f,
                          std::function<double(double)> y0, double horizon = 1.0) {
  ModelProblem p;
  p.forcing.eval = std::move(f);
  p.initial.eval = std::move(y0);
  p.horizon = horizon;
  return p;
}

TEST(LoadVector, SimpleForcings) {
  const Grid1D g = build_grid(0.0, 1.0, 9);
  ModelProblem zero = heat_problem([](double, double) { return 0.0; }, [](double) { return 0.0; });
  EXPECT_EQ(load_vector(g, zero, 0.5).norm(), 0.0);
  ModelProblem one = heat_problem([](double, double) { return 1.0; }, [](double) { return 0.0; });
  const Vector f = load_vector(g, one, 0.5);
  for (Eigen::Index i = 0; i < f.size(); ++i) EXPECT_NEAR(f(i), 0.1, 1e-15);
  EXPECT_THROW(load_vector(g, one, 1.5), InvalidArgument);
  EXPECT_THROW(load_vector(g, one, -0.1), InvalidArgument);
}

TEST(LoadVector, PolynomialForcingAgainstDenseTrapezoid) {
  const Grid1D g = build_grid(0.0, 2.0, 499);
  ModelProblem p = heat_problem([](double t, double x) { return t * t * t - x * x; },
                                [](double) { return 0.0; }, 3.0);
  const Vector f = load_vector(g, p, 1.0);
  // Trapezoid with 1e4 subintervals per element on each side of node i.
  const int sub = 10000;
  Vector oracle(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const Eigen::Index node = i + 1;
    double sum = 0.0;
    for (int side = 0; side < 2; ++side) {
      const double lo = g.node(node - 1 + side);
      const double hi = g.node(node + side);
      const double step = (hi - lo) / sub;
      for (int s = 0; s <= sub; ++s) {
        const double x = lo + s * step;
        const double hat = side == 0 ? (x - lo) / (hi - lo) : (hi - x) / (hi - lo);
        sum += (s == 0 || s == sub ? 0.5 : 1.0) * step * (1.0 - x * x) * hat;
      }
    }
    oracle(i) = sum;
  }
  EXPECT_LT((f - oracle).norm() / oracle.norm(), 1e-8);
}

TEST(InterpolateInitial, ZeroAndHat) {
  const Grid1D g = build_grid(0.0, 1.0, 7);
  ModelProblem p = heat_problem([](double, double) { return 0.0; }, [](double) { return 0.0; });
  EXPECT_EQ(interpolate_initial(g, p).norm(), 0.0);
  Vector hat = Vector::Zero(g.num_nodes());
  hat(3) = 1.0;
  p.initial = SpaceFunction{[&](double x) { return g.evaluate(hat, x); }, g.nodes()};
  const Vector y = interpolate_initial(g, p);
  Vector e = Vector::Zero(7);
  e(2) = 1.0;
  EXPECT_LT((y - e).norm(), 1e-12);
}

TEST(InterpolateInitial, IdempotentOnFeFunctions) {
  std::mt19937_64 rng(7);
  const Grid1D g(testing::random_nodes(rng, 0.0, 3.0, 25));
  const Vector coeffs = testing::random_matrix(rng, 25, 1).col(0);
  const Vector nodal = to_nodal(g, BoundaryKind::Dirichlet, coeffs);
  ModelProblem p = heat_problem([](double, double) { return 0.0; }, nullptr);
  p.initial = SpaceFunction{[&](double x) { return g.evaluate(nodal, x); }, g.nodes()};
  EXPECT_LT((interpolate_initial(g, p) - coeffs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(InterpolateInitial, CharacteristicFunctionsProjectExactly) {
  const Grid1D g = build_grid(0.0, 2.0, 499);
  ModelProblem p = heat_problem([](double, double) { return 0.0; }, nullptr, 3.0);
  p.initial = SpaceFunction{[](double x) {
                              if (x > 0.5 && x < 1.0) return 1.0;
                              if (x > 1.0 && x < 1.5) return -1.0;
                              return 0.0;
                            },
                            {0.5, 1.0, 1.5}};
  const Vector y = interpolate_initial(g, p);
  const Vector b = moments(g, BoundaryKind::Dirichlet, p.initial);
  const FeMatrices fe = assemble(g, BoundaryKind::Dirichlet);
  EXPECT_LT((fe.mass * y - b).norm(), 1e-12);
  // Node 125 sits at x = 0.5: only the right half-hat sees the indicator.
  EXPECT_NEAR(b(124), 0.002, 1e-15);
  EXPECT_NEAR(b(130), 0.004, 1e-15);
  EXPECT_NEAR(b(249), 0.0, 1e-15);  // x = 1: +1 and -1 halves cancel
}

TEST(Robin, BoundaryDofsAndForms) {
  const Grid1D g = build_grid(0.0, 1.0, 3);
  ModelProblem p = heat_problem([](double, double) { return 0.0; }, [](double) { return 0.0; });
  p.boundary = BoundaryKind::Robin;
  p.robin = RobinData{2.0, 0.5, 3.0, -1.0};
  const FeMatrices fe = assemble(g, p);
  EXPECT_EQ(fe.mass.size(), 5);
  EXPECT_EQ(fe.robin.diag()(0), 2.0);
  EXPECT_EQ(fe.robin.diag()(4), 3.0);
  EXPECT_EQ(fe.robin.diag()(2), 0.0);
  const Vector f = load_vector(g, p, 0.0);
  EXPECT_EQ(f(0), 0.5);
  EXPECT_EQ(f(4), -1.0);
  const Matrix w = fe.weight(InnerProduct::V, BoundaryKind::Robin).dense();
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(w).eigenvalues().minCoeff(), 0.0);
}

TEST(ModelProblem, Validation) {
  ModelProblem p = heat_problem([](double, double) { return 0.0; }, [](double) { return 0.0; });
  EXPECT_NO_THROW(p.validate());
  p.diffusivity = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.diffusivity = 1.0;
  p.horizon = -1.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.horizon = 1.0;
  p.kind = ProblemKind::SemilinearCubic;
  p.cubic = -1.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.kind = ProblemKind::LinearHeat;
  p.cubic = 0.0;
  p.velocity = 1.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(CubicTerm, MatchesFineQuadratureAndJacobian) {
  std::mt19937_64 rng(8);
  const Grid1D g(testing::random_nodes(rng, 0.0, 1.0, 12));
  const Vector y = testing::random_matrix(rng, 12, 1).col(0);
  const Vector nodal = to_nodal(g, BoundaryKind::Dirichlet, y);
  const Vector term = cubic_term(g, BoundaryKind::Dirichlet, y, 2.0);
  // Boole's rule per element is exact for the degree-4 integrand.
  for (Eigen::Index i = 0; i < 12; ++i) {
    const Eigen::Index node = i + 1;
    double sum = 0.0;
    for (Eigen::Index k = node - 1; k <= node; ++k) {
      auto f = [&](double p) {
        const double v = g.evaluate(nodal, p);
        const double hat = k < node ? (p - g.node(node - 1)) / g.h(node - 1)
                                    : (g.node(node + 1) - p) / g.h(node);
        return 2.0 * v * v * v * hat;
      };
      const double a = g.node(k);
      const double q = g.h(k) / 4.0;
      sum += 2.0 * q / 45.0 *
             (7.0 * f(a) + 32.0 * f(a + q) + 12.0 * f(a + 2 * q) + 32.0 * f(a + 3 * q) +
              7.0 * f(a + 4 * q));
    }
    EXPECT_NEAR(term(i), sum, 1e-14);
  }
  EXPECT_LT((cubic_term(g, BoundaryKind::Dirichlet, y, 2.0, 4) - term).norm(), 1e-14);

  const Matrix jac = cubic_jacobian(g, BoundaryKind::Dirichlet, y, 2.0).dense();
  const double eps = 1e-6;
  for (Eigen::Index j = 0; j < 12; ++j) {
    Vector yp = y, ym = y;
    yp(j) += eps;
    ym(j) -= eps;
    const Vector fd = (cubic_term(g, BoundaryKind::Dirichlet, yp, 2.0) -
                       cubic_term(g, BoundaryKind::Dirichlet, ym, 2.0)) /
                      (2 * eps);
    EXPECT_LT((fd - jac.col(j)).norm(), 1e-7);
  }
}

TEST(CrossInnerProduct, SameGridMatchesMatrixForm) {
  std::mt19937_64 rng(9);
  const Grid1D g(testing::random_nodes(rng, 0.0, 2.0, 20));
  const Vector u = testing::random_matrix(rng, 20, 1).col(0);
  const Vector v = testing::random_matrix(rng, 20, 1).col(0);
  const FeMatrices fe = assemble(g, BoundaryKind::Dirichlet);
  const Vector nu = to_nodal(g, BoundaryKind::Dirichlet, u);
  const Vector nv = to_nodal(g, BoundaryKind::Dirichlet, v);
  const double h = cross_inner_product(g, nu, g, nv, InnerProduct::H, BoundaryKind::Dirichlet);
  const double s = cross_inner_product(g, nu, g, nv, InnerProduct::V, BoundaryKind::Dirichlet);
  EXPECT_NEAR(h, u.dot(fe.mass * v), 1e-12 * std::abs(h) + 1e-14);
  EXPECT_NEAR(s, u.dot(fe.stiffness * v), 1e-12 * std::abs(s) + 1e-12);
}

TEST(CrossInnerProduct, RefinementInvariantAndDisjointSupport) {
  const Grid1D coarse = build_grid(0.0, 1.0, 4);
  const Grid1D fine = build_grid(0.0, 1.0, 9);
  Vector u(6);
  u << 0.0, 1.0, -2.0, 0.5, 3.0, 0.0;
  const Vector uf = transfer_nodal(coarse, u, fine);
  for (auto x : {InnerProduct::H, InnerProduct::V}) {
    const double self = cross_inner_product(coarse, u, coarse, u, x, BoundaryKind::Dirichlet);
    const double mixed = cross_inner_product(coarse, u, fine, uf, x, BoundaryKind::Dirichlet);
    EXPECT_NEAR(mixed, self, 1e-12 * self);
  }
  // Hat at 0.2 on the coarse grid vs hat at 0.7 on a shifted grid.
  const Grid1D other({0.0, 0.33, 0.6, 0.7, 0.8, 1.0});
  Vector a = Vector::Zero(6), b = Vector::Zero(6);
  a(1) = 1.0;
  b(3) = 1.0;
  EXPECT_EQ(cross_inner_product(coarse, a, other, b, InnerProduct::H, BoundaryKind::Dirichlet),
            0.0);
  EXPECT_THROW(cross_inner_product(coarse, a, build_grid(0.0, 2.0, 4), b, InnerProduct::H,
                                   BoundaryKind::Dirichlet),
               InvalidArgument);
}

TEST(MergeGrids, UnionOfNodes) {
  const Grid1D a({0.0, 0.3, 1.0});
  const Grid1D b({0.0, 0.3, 0.5, 1.0});
  const Grid1D m = merge_grids(a, b);
  EXPECT_EQ(m.nodes(), (std::vector<double>{0.0, 0.3, 0.5, 1.0}));
  Vector v(3);
  v << 0.0, 3.0, 1.0;
  const Vector t = transfer_nodal(a, v, m);
  EXPECT_DOUBLE_EQ(t(2), 3.0 + (1.0 - 3.0) * 0.2 / 0.7);
}

TEST(Integrate, SplitsAtBreakpoints) {
  auto step = [](double x) { return x < 0.3 ? 1.0 : 5.0; };
  const std::vector<double> bp{0.3};
  EXPECT_NEAR(integrate(step, 0.0, 1.0, bp, 2), 0.3 + 3.5, 1e-15);
  for (int n = 1; n <= 4; ++n) {
    auto poly = [n](double x) { return std::pow(x, 2 * n - 1); };
    EXPECT_NEAR(integrate(poly, 0.0, 1.0, {}, n), 1.0 / (2 * n), 1e-15);
  }
}

}  // namespace
}  // namespace podrom
