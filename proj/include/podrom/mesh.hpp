#pragma once

// Continuous piecewise-linear finite elements on 1D grids.

#include "podrom/linalg.hpp"

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace podrom {

/// Node coordinates of a 1D mesh, strictly increasing, at least 3 nodes.
class Grid1D {
 public:
  explicit Grid1D(std::vector<double> nodes);

  const std::vector<double>& nodes() const { return nodes_; }
  double a() const { return nodes_.front(); }
  double b() const { return nodes_.back(); }
  Eigen::Index num_nodes() const { return static_cast<Eigen::Index>(nodes_.size()); }
  Eigen::Index num_elements() const { return num_nodes() - 1; }
  double node(Eigen::Index i) const { return nodes_[static_cast<std::size_t>(i)]; }
  double h(Eigen::Index element) const { return node(element + 1) - node(element); }

  /// Element containing x; x at an interior node belongs to the element on its right.
  Eigen::Index locate(double x) const;

  /// Piecewise-linear interpolant of nodal values evaluated at x.
  double evaluate(const Vector& nodal, double x) const;

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  std::vector<double> nodes_;
};

using GridPtr = std::shared_ptr<const Grid1D>;

/// Uniform grid on [a, b] with m interior nodes, spacing (b - a) / (m + 1).
Grid1D build_grid(double a, double b, int m);

/// Union of the node sets of two grids on the same interval. Nodes closer
/// than 1e-14 (b - a) are identified.
Grid1D merge_grids(const Grid1D& first, const Grid1D& second);
Grid1D merge_grids(std::span<const GridPtr> grids);

/// Samples g at the grid nodes.
Vector nodal_interpolant(const Grid1D& grid, const std::function<double(double)>& g);

/// Piecewise-linear transfer of nodal values between grids on one interval.
Vector transfer_nodal(const Grid1D& from, const Vector& nodal, const Grid1D& to);

enum class BoundaryKind { Dirichlet, Robin };
enum class InnerProduct { H, V };

std::string to_string(BoundaryKind kind);
std::string to_string(InnerProduct x);
BoundaryKind boundary_from_string(const std::string& s);
InnerProduct inner_product_from_string(const std::string& s);

/// Degrees of freedom of a grid: interior nodes for homogeneous Dirichlet,
/// all nodes for Robin.
Eigen::Index dof_count(const Grid1D& grid, BoundaryKind boundary);
Eigen::Index first_dof_node(BoundaryKind boundary);

/// Coefficient vector -> values at all nodes (zero boundary values for Dirichlet).
Vector to_nodal(const Grid1D& grid, BoundaryKind boundary, const Vector& coeffs);
/// Values at all nodes -> coefficient vector (boundary values dropped for Dirichlet).
Vector to_coeffs(const Grid1D& grid, BoundaryKind boundary, const Vector& nodal);

/// A function of x with known points of nonsmoothness. Quadrature splits
/// elements at the breakpoints so piecewise data is integrated exactly.
struct SpaceFunction {
  std::function<double(double)> eval;
  std::vector<double> breakpoints;
};

struct SpaceTimeFunction {
  std::function<double(double, double)> eval;  // (t, x)
  std::vector<double> breakpoints;             // in x
};

/// Robin data c y' n + q y = g at the two endpoints.
struct RobinData {
  double q_left = 0.0;
  double g_left = 0.0;
  double q_right = 0.0;
  double g_right = 0.0;
};

enum class ProblemKind { LinearHeat, ConvectionReactionDiffusion, SemilinearCubic };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& s);

/// y_t - c y_xx + beta y_x + a y + c3 y^3 = f on (a, b) x (0, T].
struct ModelProblem {
  ProblemKind kind = ProblemKind::LinearHeat;
  double diffusivity = 1.0;
  double velocity = 0.0;
  double reaction = 0.0;
  double cubic = 0.0;
  SpaceTimeFunction forcing;
  SpaceFunction initial;
  BoundaryKind boundary = BoundaryKind::Dirichlet;
  RobinData robin;
  double horizon = 1.0;

  void validate() const;
};

/// Exact FE matrices restricted to the degrees of freedom.
struct FeMatrices {
  Tridiagonal mass;
  Tridiagonal stiffness;  // \int u' v'
  Tridiagonal advection;  // \int u' v
  Tridiagonal robin;      // boundary form q u v (zero for Dirichlet)
  double reaction_scale = 0.0;

  /// Full bilinear form a(u, v) = c S + beta Adv + a M + Robin.
  Tridiagonal operator_matrix(const ModelProblem& problem) const;

  /// Gram matrix of the X inner product: mass for H; stiffness for V, plus
  /// mass when Robin dofs make the stiffness singular.
  Tridiagonal weight(InnerProduct x, BoundaryKind boundary) const;
};

/// Mass/stiffness/advection matrices without problem coefficients.
FeMatrices assemble(const Grid1D& grid, BoundaryKind boundary);
FeMatrices assemble(const Grid1D& grid, const ModelProblem& problem);

/// (\int g phi_i)_i over the dofs, 3-point Gauss per element piece.
Vector moments(const Grid1D& grid, BoundaryKind boundary, const SpaceFunction& g);

/// (<f(t), phi_i>)_i plus Robin boundary data g.
Vector load_vector(const Grid1D& grid, const ModelProblem& problem, double t);

/// L2 projection of the initial value onto the FE space.
Vector interpolate_initial(const Grid1D& grid, const ModelProblem& problem);

/// (\int c3 y^3 phi_i)_i for the FE function y with the given coefficients,
/// Gauss quadrature with `points` nodes per element (3 and up are exact).
Vector cubic_term(const Grid1D& grid, BoundaryKind boundary, const Vector& coeffs,
                  double c3, int points = 3);

/// (\int 3 c3 y^2 phi_j phi_i)_ij, the Jacobian of cubic_term.
Tridiagonal cubic_jacobian(const Grid1D& grid, BoundaryKind boundary,
                           const Vector& coeffs, double c3, int points = 3);

/// <u, v>_X for FE functions given by nodal values on possibly different
/// grids over the same interval. Integrates exactly on the merged grid.
double cross_inner_product(const Grid1D& grid_u, const Vector& nodal_u,
                           const Grid1D& grid_v, const Vector& nodal_v, InnerProduct x,
                           BoundaryKind boundary);

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};
const GaussRule& gauss_rule(int points);

/// Integrates g over [lo, hi] with the given rule after splitting at breakpoints.
double integrate(const std::function<double(double)>& g, double lo, double hi,
                 std::span<const double> breakpoints, int points);

}  // namespace podrom
