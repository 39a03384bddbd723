#include "podrom/mesh.hpp"

#include "podrom/error.hpp"

#include <algorithm>
#include <cmath>

namespace podrom {

Grid1D::Grid1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 3) {
    throw InvalidArgument("grid needs at least 3 nodes (one interior dof)");
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!std::isfinite(nodes_[i])) throw InvalidArgument("grid node is not finite");
    if (i > 0 && !(nodes_[i] > nodes_[i - 1])) {
      throw InvalidArgument("grid nodes must be strictly increasing");
    }
  }
}

Eigen::Index Grid1D::locate(double x) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  auto k = static_cast<Eigen::Index>(it - nodes_.begin()) - 1;
  return std::clamp<Eigen::Index>(k, 0, num_elements() - 1);
}

double Grid1D::evaluate(const Vector& nodal, double x) const {
  const Eigen::Index k = locate(x);
  const double s = (x - node(k)) / h(k);
  return (1.0 - s) * nodal(k) + s * nodal(k + 1);
}

Grid1D build_grid(double a, double b, int m) {
  if (m < 1) throw InvalidArgument("build_grid: need at least one interior node");
  if (!(b > a)) throw InvalidArgument("build_grid: empty interval");
  const double h = (b - a) / (m + 1);
  std::vector<double> nodes(static_cast<std::size_t>(m) + 2);
  for (int i = 0; i <= m + 1; ++i) nodes[static_cast<std::size_t>(i)] = a + i * h;
  nodes.back() = b;
  return Grid1D(std::move(nodes));
}

namespace {

void require_same_interval(const Grid1D& u, const Grid1D& v) {
  const double tol = 1e-12 * (std::abs(u.a()) + std::abs(u.b()) + (u.b() - u.a()));
  if (std::abs(u.a() - v.a()) > tol || std::abs(u.b() - v.b()) > tol) {
    throw InvalidArgument("grids cover different intervals");
  }
}

std::vector<double> merge_nodes(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> all;
  all.reserve(x.size() + y.size());
  std::merge(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(all));
  const double tol = 1e-14 * (all.back() - all.front());
  std::vector<double> out;
  out.reserve(all.size());
  for (double p : all) {
    if (out.empty() || p - out.back() > tol) out.push_back(p);
  }
  out.front() = x.front();
  out.back() = x.back();
  return out;
}

}  // namespace

Grid1D merge_grids(const Grid1D& first, const Grid1D& second) {
  require_same_interval(first, second);
  return Grid1D(merge_nodes(first.nodes(), second.nodes()));
}

Grid1D merge_grids(std::span<const GridPtr> grids) {
  if (grids.empty()) throw InvalidArgument("merge_grids: no grids");
  std::vector<double> nodes = grids.front()->nodes();
  for (std::size_t i = 1; i < grids.size(); ++i) {
    if (grids[i] == grids.front() || *grids[i] == *grids.front()) continue;
    require_same_interval(*grids.front(), *grids[i]);
    nodes = merge_nodes(nodes, grids[i]->nodes());
  }
  return Grid1D(std::move(nodes));
}

Vector nodal_interpolant(const Grid1D& grid, const std::function<double(double)>& g) {
  Vector v(grid.num_nodes());
  for (Eigen::Index i = 0; i < grid.num_nodes(); ++i) v(i) = g(grid.node(i));
  return v;
}

Vector transfer_nodal(const Grid1D& from, const Vector& nodal, const Grid1D& to) {
  require_same_interval(from, to);
  if (nodal.size() != from.num_nodes()) {
    throw InvalidArgument("transfer_nodal: value count does not match grid");
  }
  Vector out(to.num_nodes());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < to.num_nodes(); ++i) {
    const double x = to.node(i);
    while (k + 1 < from.num_elements() && x >= from.node(k + 1)) ++k;
    const double s = std::clamp((x - from.node(k)) / from.h(k), 0.0, 1.0);
    out(i) = (1.0 - s) * nodal(k) + s * nodal(k + 1);
  }
  out(0) = nodal(0);
  out(to.num_nodes() - 1) = nodal(from.num_nodes() - 1);
  return out;
}

std::string to_string(BoundaryKind kind) {
  return kind == BoundaryKind::Dirichlet ? "dirichlet" : "robin";
}

std::string to_string(InnerProduct x) { return x == InnerProduct::H ? "H" : "V"; }

BoundaryKind boundary_from_string(const std::string& s) {
  if (s == "dirichlet") return BoundaryKind::Dirichlet;
  if (s == "robin") return BoundaryKind::Robin;
  throw InvalidArgument("unknown boundary kind '" + s + "'");
}

InnerProduct inner_product_from_string(const std::string& s) {
  if (s == "H" || s == "h") return InnerProduct::H;
  if (s == "V" || s == "v") return InnerProduct::V;
  throw InvalidArgument("unknown inner product '" + s + "'");
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::LinearHeat:
      return "linear_heat";
    case ProblemKind::ConvectionReactionDiffusion:
      return "convection_reaction_diffusion";
    case ProblemKind::SemilinearCubic:
      return "semilinear_cubic";
  }
  return "?";
}

ProblemKind problem_kind_from_string(const std::string& s) {
  if (s == "linear_heat") return ProblemKind::LinearHeat;
  if (s == "convection_reaction_diffusion") return ProblemKind::ConvectionReactionDiffusion;
  if (s == "semilinear_cubic") return ProblemKind::SemilinearCubic;
  throw InvalidArgument("unknown problem kind '" + s + "'");
}

Eigen::Index dof_count(const Grid1D& grid, BoundaryKind boundary) {
  return boundary == BoundaryKind::Dirichlet ? grid.num_nodes() - 2 : grid.num_nodes();
}

Eigen::Index first_dof_node(BoundaryKind boundary) {
  return boundary == BoundaryKind::Dirichlet ? 1 : 0;
}

Vector to_nodal(const Grid1D& grid, BoundaryKind boundary, const Vector& coeffs) {
  if (coeffs.size() != dof_count(grid, boundary)) {
    throw InvalidArgument("coefficient vector does not match grid dofs");
  }
  if (boundary == BoundaryKind::Robin) return coeffs;
  Vector nodal = Vector::Zero(grid.num_nodes());
  nodal.segment(1, coeffs.size()) = coeffs;
  return nodal;
}

Vector to_coeffs(const Grid1D& grid, BoundaryKind boundary, const Vector& nodal) {
  if (nodal.size() != grid.num_nodes()) {
    throw InvalidArgument("nodal vector does not match grid");
  }
  if (boundary == BoundaryKind::Robin) return nodal;
  return nodal.segment(1, grid.num_nodes() - 2);
}

void ModelProblem::validate() const {
  if (!(diffusivity > 0.0)) throw InvalidArgument("diffusivity must be positive");
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  if (!(cubic >= 0.0)) throw InvalidArgument("cubic coefficient must be nonnegative");
  if (!forcing.eval || !initial.eval) {
    throw InvalidArgument("forcing and initial value must be set");
  }
  switch (kind) {
    case ProblemKind::LinearHeat:
      if (velocity != 0.0 || reaction != 0.0 || cubic != 0.0) {
        throw InvalidArgument("linear heat problem has no convection, reaction or cubic term");
      }
      break;
    case ProblemKind::ConvectionReactionDiffusion:
      if (cubic != 0.0) {
        throw InvalidArgument("convection-reaction-diffusion problem has no cubic term");
      }
      break;
    case ProblemKind::SemilinearCubic:
      break;
  }
}

namespace {

Tridiagonal restrict_to_dofs(const Tridiagonal& full, BoundaryKind boundary) {
  if (boundary == BoundaryKind::Robin) return full;
  const auto n = full.size() - 2;
  return Tridiagonal(full.lower().segment(1, n - 1), full.diag().segment(1, n),
                     full.upper().segment(1, n - 1));
}

}  // namespace

FeMatrices assemble(const Grid1D& grid, BoundaryKind boundary) {
  const auto nn = grid.num_nodes();
  Tridiagonal mass(nn), stiffness(nn), advection(nn), robin(nn);
  for (Eigen::Index k = 0; k < grid.num_elements(); ++k) {
    const double h = grid.h(k);
    mass.diag()(k) += h / 3.0;
    mass.diag()(k + 1) += h / 3.0;
    mass.upper()(k) += h / 6.0;
    mass.lower()(k) += h / 6.0;

    stiffness.diag()(k) += 1.0 / h;
    stiffness.diag()(k + 1) += 1.0 / h;
    stiffness.upper()(k) -= 1.0 / h;
    stiffness.lower()(k) -= 1.0 / h;

    // \int phi_j' phi_i: phi' = -+1/h, \int phi_i = h/2 on the element
    advection.diag()(k) -= 0.5;
    advection.diag()(k + 1) += 0.5;
    advection.upper()(k) += 0.5;
    advection.lower()(k) -= 0.5;
  }
  FeMatrices out;
  out.mass = restrict_to_dofs(mass, boundary);
  out.stiffness = restrict_to_dofs(stiffness, boundary);
  out.advection = restrict_to_dofs(advection, boundary);
  out.robin = restrict_to_dofs(robin, boundary);
  return out;
}

FeMatrices assemble(const Grid1D& grid, const ModelProblem& problem) {
  problem.validate();
  FeMatrices out = assemble(grid, problem.boundary);
  out.reaction_scale = problem.reaction;
  if (problem.boundary == BoundaryKind::Robin) {
    out.robin.diag()(0) = problem.robin.q_left;
    out.robin.diag()(out.robin.size() - 1) = problem.robin.q_right;
  }
  return out;
}

Tridiagonal FeMatrices::operator_matrix(const ModelProblem& problem) const {
  return stiffness * problem.diffusivity + advection * problem.velocity +
         mass * problem.reaction + robin;
}

Tridiagonal FeMatrices::weight(InnerProduct x, BoundaryKind boundary) const {
  if (x == InnerProduct::H) return mass;
  if (boundary == BoundaryKind::Robin) return stiffness + mass;
  return stiffness;
}

const GaussRule& gauss_rule(int points) {
  static const GaussRule g1{{0.0}, {2.0}};
  static const GaussRule g2{{-0.57735026918962576451, 0.57735026918962576451}, {1.0, 1.0}};
  static const GaussRule g3{{-0.77459666924148337704, 0.0, 0.77459666924148337704},
                            {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}};
  static const GaussRule g4{
      {-0.86113631159405257522, -0.33998104358485626480, 0.33998104358485626480,
       0.86113631159405257522},
      {0.34785484513745385737, 0.65214515486254614263, 0.65214515486254614263,
       0.34785484513745385737}};
  switch (points) {
    case 1:
      return g1;
    case 2:
      return g2;
    case 3:
      return g3;
    case 4:
      return g4;
    default:
      throw InvalidArgument("gauss_rule: supported point counts are 1..4");
  }
}

namespace {

// Subdivision of [lo, hi] at the breakpoints that fall strictly inside.
std::vector<double> pieces(double lo, double hi, std::span<const double> breakpoints) {
  std::vector<double> cuts{lo};
  const double tol = 1e-14 * (hi - lo);
  for (double p : breakpoints) {
    if (p > lo + tol && p < hi - tol) cuts.push_back(p);
  }
  std::sort(cuts.begin() + 1, cuts.end());
  cuts.push_back(hi);
  return cuts;
}

}  // namespace

double integrate(const std::function<double(double)>& g, double lo, double hi,
                 std::span<const double> breakpoints, int points) {
  const GaussRule& rule = gauss_rule(points);
  const auto cuts = pieces(lo, hi, breakpoints);
  double sum = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double mid = 0.5 * (cuts[p] + cuts[p + 1]);
    const double half = 0.5 * (cuts[p + 1] - cuts[p]);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      sum += half * rule.weights[q] * g(mid + half * rule.points[q]);
    }
  }
  return sum;
}

Vector moments(const Grid1D& grid, BoundaryKind boundary, const SpaceFunction& g) {
  const GaussRule& rule = gauss_rule(3);
  Vector full = Vector::Zero(grid.num_nodes());
  for (Eigen::Index k = 0; k < grid.num_elements(); ++k) {
    const double xl = grid.node(k);
    const double h = grid.h(k);
    const auto cuts = pieces(xl, xl + h, g.breakpoints);
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
      const double mid = 0.5 * (cuts[p] + cuts[p + 1]);
      const double half = 0.5 * (cuts[p + 1] - cuts[p]);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double x = mid + half * rule.points[q];
        const double w = half * rule.weights[q] * g.eval(x);
        const double s = (x - xl) / h;
        full(k) += w * (1.0 - s);
        full(k + 1) += w * s;
      }
    }
  }
  return to_coeffs(grid, boundary, full);
}

Vector load_vector(const Grid1D& grid, const ModelProblem& problem, double t) {
  const double slack = 1e-12 * problem.horizon;
  if (t < -slack || t > problem.horizon + slack) {
    throw InvalidArgument("load_vector: time outside [0, T]");
  }
  const SpaceFunction slice{[&](double x) { return problem.forcing.eval(t, x); },
                            problem.forcing.breakpoints};
  Vector f = moments(grid, problem.boundary, slice);
  if (problem.boundary == BoundaryKind::Robin) {
    f(0) += problem.robin.g_left;
    f(f.size() - 1) += problem.robin.g_right;
  }
  return f;
}

Vector interpolate_initial(const Grid1D& grid, const ModelProblem& problem) {
  const Vector b = moments(grid, problem.boundary, problem.initial);
  const FeMatrices fe = assemble(grid, problem.boundary);
  return fe.mass.solve(b);
}

Vector cubic_term(const Grid1D& grid, BoundaryKind boundary, const Vector& coeffs,
                  double c3, int points) {
  const Vector y = to_nodal(grid, boundary, coeffs);
  const GaussRule& rule = gauss_rule(points);
  Vector full = Vector::Zero(grid.num_nodes());
  if (c3 != 0.0) {
    for (Eigen::Index k = 0; k < grid.num_elements(); ++k) {
      const double half = 0.5 * grid.h(k);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double s = 0.5 * (1.0 + rule.points[q]);
        const double v = (1.0 - s) * y(k) + s * y(k + 1);
        const double w = half * rule.weights[q] * c3 * v * v * v;
        full(k) += w * (1.0 - s);
        full(k + 1) += w * s;
      }
    }
  }
  return to_coeffs(grid, boundary, full);
}

Tridiagonal cubic_jacobian(const Grid1D& grid, BoundaryKind boundary,
                           const Vector& coeffs, double c3, int points) {
  const Vector y = to_nodal(grid, boundary, coeffs);
  const GaussRule& rule = gauss_rule(points);
  Tridiagonal full(grid.num_nodes());
  if (c3 != 0.0) {
    for (Eigen::Index k = 0; k < grid.num_elements(); ++k) {
      const double half = 0.5 * grid.h(k);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double s = 0.5 * (1.0 + rule.points[q]);
        const double v = (1.0 - s) * y(k) + s * y(k + 1);
        const double w = half * rule.weights[q] * 3.0 * c3 * v * v;
        full.diag()(k) += w * (1.0 - s) * (1.0 - s);
        full.diag()(k + 1) += w * s * s;
        full.upper()(k) += w * s * (1.0 - s);
        full.lower()(k) += w * s * (1.0 - s);
      }
    }
  }
  return restrict_to_dofs(full, boundary);
}

double cross_inner_product(const Grid1D& grid_u, const Vector& nodal_u,
                           const Grid1D& grid_v, const Vector& nodal_v, InnerProduct x,
                           BoundaryKind boundary) {
  require_same_interval(grid_u, grid_v);
  if (nodal_u.size() != grid_u.num_nodes() || nodal_v.size() != grid_v.num_nodes()) {
    throw InvalidArgument("cross_inner_product: nodal vector does not match grid");
  }
  const auto& xu = grid_u.nodes();
  const auto& xv = grid_v.nodes();
  const double tol = 1e-14 * (grid_u.b() - grid_u.a());
  const bool with_mass = x == InnerProduct::H || boundary == BoundaryKind::Robin;
  const bool with_slope = x == InnerProduct::V;

  // Sweep the merged node sequence; both functions are affine between
  // consecutive merged nodes.
  std::size_t i = 0;  // element of u containing the current point
  std::size_t j = 0;
  auto value = [](const std::vector<double>& nodes, const Vector& vals, std::size_t k,
                  double p) {
    const double s = std::clamp((p - nodes[k]) / (nodes[k + 1] - nodes[k]), 0.0, 1.0);
    return (1.0 - s) * vals(static_cast<Eigen::Index>(k)) +
           s * vals(static_cast<Eigen::Index>(k + 1));
  };

  double p = xu.front();
  double up = nodal_u(0);
  double vp = nodal_v(0);
  double sum = 0.0;
  while (true) {
    // next merged node
    const double nu = xu[i + 1];
    const double nv = xv[j + 1];
    const double q = std::min(nu, nv);
    const double uq = value(xu, nodal_u, i, q);
    const double vq = value(xv, nodal_v, j, q);
    const double len = q - p;
    if (len > tol) {
      if (with_mass) sum += len / 6.0 * (2.0 * up * vp + up * vq + uq * vp + 2.0 * uq * vq);
      if (with_slope) sum += (uq - up) * (vq - vp) / len;
    }
    p = q;
    up = uq;
    vp = vq;
    const bool last_u = i + 2 == xu.size();
    const bool last_v = j + 2 == xv.size();
    if (nu - q <= tol) {
      if (last_u) break;
      ++i;
      up = nodal_u(static_cast<Eigen::Index>(i));
    }
    if (nv - q <= tol) {
      if (last_v) break;
      ++j;
      vp = nodal_v(static_cast<Eigen::Index>(j));
    }
  }
  return sum;
}

}  // namespace podrom
