#include "podrom/pod.hpp"

#include "podrom/csv.hpp"
#include "podrom/error.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace podrom {

std::string to_string(PodMethod method) {
  switch (method) {
    case PodMethod::Svd:
      return "svd";
    case PodMethod::EigYYt:
      return "eig_yyt";
    case PodMethod::EigYtY:
      return "eig_yty";
  }
  return "?";
}

PodMethod pod_method_from_string(const std::string& s) {
  if (s == "svd") return PodMethod::Svd;
  if (s == "eig_yyt") return PodMethod::EigYYt;
  if (s == "eig_yty") return PodMethod::EigYtY;
  throw InvalidArgument("unknown POD method '" + s + "'");
}

PodBasis PodBasis::truncated(std::size_t l) const {
  if (l > size()) throw InvalidArgument("cannot truncate a basis to more modes than it has");
  PodBasis out = *this;
  const auto k = static_cast<Eigen::Index>(l);
  out.modes = modes.leftCols(k);
  out.eigenvalues = eigenvalues.head(k);
  out.eigvecs_k = eigvecs_k.leftCols(k);
  return out;
}

Tridiagonal weight_tridiagonal(const Grid1D& grid, InnerProduct x, BoundaryKind boundary) {
  return assemble(grid, boundary).weight(x, boundary);
}

Matrix weight_matrix(const Grid1D& grid, InnerProduct x, BoundaryKind boundary) {
  return weight_tridiagonal(grid, x, boundary).dense();
}

namespace {

std::size_t count_above(const Vector& values, double cutoff) {
  std::size_t r = 0;
  while (r < static_cast<std::size_t>(values.size()) &&
         values(static_cast<Eigen::Index>(r)) > cutoff) {
    ++r;
  }
  return r;
}

std::size_t resolve_count(std::size_t l, std::size_t rank) {
  if (l == kAllModes) return rank;
  if (l > rank) throw RankDeficient(l, rank);
  return l;
}

// Scales modes to the sign convention and mirrors the signs onto Phi.
void fix_signs(PodBasis& basis) {
  const Vector s = canonicalize_signs(basis.modes);
  for (Eigen::Index i = 0; i < s.size(); ++i) basis.eigvecs_k.col(i) *= s(i);
}

double weighted_energy(const Matrix& y, const Matrix& w, const Vector& alpha) {
  const Matrix wy = w * y;
  double total = 0.0;
  for (Eigen::Index j = 0; j < y.cols(); ++j) total += alpha(j) * y.col(j).dot(wy.col(j));
  return total;
}

}  // namespace

PodBasis compute_pod(const Matrix& y, const Matrix& w, const Vector& alpha, std::size_t l,
                     PodMethod method) {
  const Eigen::Index m = y.rows();
  const Eigen::Index n = y.cols();
  if (m == 0 || n == 0) throw InvalidArgument("empty snapshot matrix");
  if (w.rows() != m || w.cols() != m) throw InvalidArgument("weight matrix has wrong size");
  if (alpha.size() != n) throw InvalidArgument("one weight per snapshot required");
  if (!y.allFinite() || !w.allFinite() || !alpha.allFinite()) {
    throw InvalidArgument("nonfinite snapshot data");
  }
  if ((alpha.array() <= 0.0).any()) throw InvalidArgument("snapshot weights must be positive");

  const double scale = static_cast<double>(std::max(m, n)) * kMachineEpsilon;
  const Vector dsqrt = alpha.cwiseSqrt();

  PodBasis basis;
  basis.method = method;
  basis.weight = w;
  basis.snapshot_weights = alpha;
  basis.total_energy = weighted_energy(y, w, alpha);

  if (method == PodMethod::Svd || method == PodMethod::EigYYt) {
    const SymmetricSqrt root = symmetric_sqrt(w);
    const Matrix ybar = root.sqrt * y * dsqrt.asDiagonal();
    if (method == PodMethod::Svd) {
      const ThinSvd svd = jacobi_svd(ybar);
      basis.full_spectrum = svd.sigma.array().square();
      const double s1 = svd.sigma.size() > 0 ? svd.sigma(0) : 0.0;
      basis.rank = s1 > 0.0 ? count_above(svd.sigma, scale * s1) : 0;
      const auto k = static_cast<Eigen::Index>(resolve_count(l, basis.rank));
      basis.eigenvalues = basis.full_spectrum.head(k);
      basis.modes = root.inv_sqrt * svd.u.leftCols(k);
      basis.eigvecs_k = svd.v.leftCols(k);
    } else {
      const Matrix cov = ybar * ybar.transpose();
      const SymmetricEigen eig = symmetric_eigen(cov);
      basis.full_spectrum = eig.values;
      const double l1 = eig.values(0);
      basis.rank = l1 > 0.0 ? count_above(eig.values, scale * l1) : 0;
      const auto k = static_cast<Eigen::Index>(resolve_count(l, basis.rank));
      basis.eigenvalues = eig.values.head(k);
      basis.modes = root.inv_sqrt * eig.vectors.leftCols(k);
      basis.eigvecs_k = (ybar.transpose() * eig.vectors.leftCols(k)) *
                        basis.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal();
    }
  } else {
    const Matrix ytilde = y * dsqrt.asDiagonal();
    Matrix k_mat = ytilde.transpose() * (w * ytilde);
    k_mat = 0.5 * (k_mat + k_mat.transpose()).eval();
    const SymmetricEigen eig = symmetric_eigen(k_mat);
    basis.full_spectrum = eig.values;
    const double l1 = eig.values(0);
    basis.rank = l1 > 0.0 ? count_above(eig.values, scale * l1) : 0;
    const auto k = static_cast<Eigen::Index>(resolve_count(l, basis.rank));
    basis.eigenvalues = eig.values.head(k);
    basis.eigvecs_k = eig.vectors.leftCols(k);
    basis.modes = ytilde * basis.eigvecs_k *
                  basis.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal();
  }
  fix_signs(basis);
  return basis;
}

PodBasis compute_pod_basis(const SnapshotSet& set, InnerProduct x, std::size_t l,
                           PodMethod method) {
  set.validate();
  if (!set.homogeneous()) {
    if (method != PodMethod::EigYtY) {
      throw UnsupportedOperation("snapshots on several grids need the eig_yty route");
    }
    return pod_from_gramian(cross_gramian(set, x), set, x, l);
  }
  const GridPtr& grid = set.grid();
  PodBasis basis = compute_pod(set.matrix(), weight_matrix(*grid, x, set.boundary),
                               set.weights(), l, method);
  basis.space = x;
  basis.boundary = set.boundary;
  basis.grid = grid;
  return basis;
}

CrossGramian cross_gramian(const SnapshotSet& set, InnerProduct x, int threads) {
  set.validate();
  const auto n = set.entries.size();
  for (const auto& e : set.entries) {
    if (std::abs(e.grid->a() - set.entries[0].grid->a()) >
            1e-12 * (e.grid->b() - e.grid->a()) ||
        std::abs(e.grid->b() - set.entries[0].grid->b()) >
            1e-12 * (e.grid->b() - e.grid->a())) {
      throw InvalidArgument("snapshot grids cover different intervals");
    }
  }
  std::vector<Vector> nodal(n);
  std::vector<double> root(n);
  for (std::size_t j = 0; j < n; ++j) {
    nodal[j] = to_nodal(*set.entries[j].grid, set.boundary, set.entries[j].coeffs);
    root[j] = std::sqrt(set.entries[j].weight);
  }
  CrossGramian gram;
  gram.k = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  auto rows = [&](int worker) {
    for (std::size_t i = static_cast<std::size_t>(worker); i < n;
         i += static_cast<std::size_t>(workers)) {
      for (std::size_t j = i; j < n; ++j) {
        const double v = root[i] * root[j] *
                         cross_inner_product(*set.entries[i].grid, nodal[i],
                                             *set.entries[j].grid, nodal[j], x, set.boundary);
        gram.k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        gram.k(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
      }
    }
  };
  if (workers == 1) {
    rows(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(rows, t);
    for (auto& t : pool) t.join();
  }
  const SymmetricEigen eig = symmetric_eigen(gram.k);
  std::size_t m = 0;
  for (const auto& e : set.entries) {
    m = std::max(m, static_cast<std::size_t>(e.grid->num_nodes()));
  }
  const double cutoff =
      static_cast<double>(std::max(n, m)) * kMachineEpsilon * eig.values(0);
  gram.rank = eig.values(0) > 0.0 ? count_above(eig.values, cutoff) : 0;
  return gram;
}

PodBasis pod_from_gramian(const CrossGramian& gram, const SnapshotSet& set, InnerProduct x,
                          std::size_t l) {
  set.validate();
  const auto n = static_cast<Eigen::Index>(set.entries.size());
  if (gram.k.rows() != n || gram.k.cols() != n) {
    throw InvalidArgument("Gramian does not match the snapshot set");
  }
  std::vector<GridPtr> grids;
  for (const auto& e : set.entries) grids.push_back(e.grid);
  const auto merged = std::make_shared<const Grid1D>(merge_grids(grids));

  Matrix ytilde(dof_count(*merged, set.boundary), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& e = set.entries[static_cast<std::size_t>(j)];
    const Vector nodal = to_nodal(*e.grid, set.boundary, e.coeffs);
    ytilde.col(j) = to_coeffs(*merged, set.boundary, transfer_nodal(*e.grid, nodal, *merged)) *
                    std::sqrt(e.weight);
  }

  const SymmetricEigen eig = symmetric_eigen(gram.k);
  PodBasis basis;
  basis.method = PodMethod::EigYtY;
  basis.space = x;
  basis.boundary = set.boundary;
  basis.grid = merged;
  basis.weight = weight_matrix(*merged, x, set.boundary);
  basis.snapshot_weights = set.weights();
  basis.total_energy = gram.k.trace();
  basis.full_spectrum = eig.values;
  basis.rank = gram.rank;
  const auto k = static_cast<Eigen::Index>(resolve_count(l, gram.rank));
  basis.eigenvalues = eig.values.head(k);
  basis.eigvecs_k = eig.vectors.leftCols(k);
  basis.modes =
      ytilde * basis.eigvecs_k * basis.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal();
  fix_signs(basis);
  return basis;
}

double energy_fraction(const PodBasis& basis, std::size_t l) {
  if (l > basis.rank) throw InvalidArgument("energy fraction beyond the numerical rank");
  if (!(basis.total_energy > 0.0)) return 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < l; ++i) sum += basis.full_spectrum(static_cast<Eigen::Index>(i));
  return sum / basis.total_energy;
}

std::size_t modes_for_energy(const PodBasis& basis, double target) {
  for (std::size_t l = 0; l <= basis.rank; ++l) {
    if (energy_fraction(basis, l) >= target) return l;
  }
  return basis.rank;
}

namespace {

Matrix apply_weight(const PodBasis& basis, const Matrix& v) {
  if (basis.grid) return weight_tridiagonal(*basis.grid, basis.space, basis.boundary) * v;
  return basis.weight * v;
}

}  // namespace

Projection project(const PodBasis& basis, const Matrix& v, std::size_t l) {
  if (v.rows() != basis.modes.rows()) {
    throw InvalidArgument("vector length does not match the basis");
  }
  const auto k = static_cast<Eigen::Index>(l == kAllModes ? basis.size() : l);
  if (k > basis.modes.cols()) throw InvalidArgument("projection onto more modes than available");
  const auto psi = basis.modes.leftCols(k);
  Projection p;
  p.coefficients = psi.transpose() * apply_weight(basis, v);
  p.reconstruction = psi * p.coefficients;
  return p;
}

double projection_residual(const PodBasis& basis, const Matrix& y, const Vector& alpha,
                           std::size_t l) {
  if (alpha.size() != y.cols()) throw InvalidArgument("one weight per snapshot required");
  const Projection p = project(basis, y, l);
  const Matrix r = y - p.reconstruction;
  const Matrix wr = apply_weight(basis, r);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < y.cols(); ++j) sum += alpha(j) * r.col(j).dot(wr.col(j));
  return sum;
}

Matrix snapshot_coordinates(const PodBasis& basis, const SnapshotSet& set) {
  if (!basis.grid) throw InvalidArgument("basis has no grid");
  Matrix y(basis.modes.rows(), static_cast<Eigen::Index>(set.size()));
  for (std::size_t j = 0; j < set.size(); ++j) {
    const auto& e = set.entries[j];
    Vector c;
    if (e.grid == basis.grid || *e.grid == *basis.grid) {
      c = e.coeffs;
    } else {
      const Vector nodal = to_nodal(*e.grid, set.boundary, e.coeffs);
      c = to_coeffs(*basis.grid, set.boundary, transfer_nodal(*e.grid, nodal, *basis.grid));
    }
    y.col(static_cast<Eigen::Index>(j)) = c;
  }
  return y;
}

void write_basis_csv(const std::filesystem::path& path, const PodBasis& basis) {
  std::string out = "# pod-basis v1\n";
  out += "# space," + to_string(basis.space) + "\n";
  out += "# method," + to_string(basis.method) + "\n";
  out += "# eigenvalues," + join(basis.eigenvalues) + "\n";
  out += "x";
  for (std::size_t i = 0; i < basis.size(); ++i) out += ",psi_" + std::to_string(i + 1);
  out += "\n";
  Matrix nodal = basis.modes;
  std::vector<double> x;
  if (basis.grid) {
    nodal.resize(basis.grid->num_nodes(), basis.modes.cols());
    for (Eigen::Index i = 0; i < basis.modes.cols(); ++i) {
      nodal.col(i) = to_nodal(*basis.grid, basis.boundary, basis.modes.col(i));
    }
    x = basis.grid->nodes();
  } else {
    for (Eigen::Index r = 0; r < nodal.rows(); ++r) x.push_back(static_cast<double>(r));
  }
  for (Eigen::Index r = 0; r < nodal.rows(); ++r) {
    out += format_double(x[static_cast<std::size_t>(r)]);
    for (Eigen::Index i = 0; i < nodal.cols(); ++i) out += "," + format_double(nodal(r, i));
    out += "\n";
  }
  write_text_file(path, out);
}

void write_spectrum_csv(const std::filesystem::path& path, const PodBasis& basis) {
  std::string out = "i,lambda,sigma,energy\n";
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < basis.full_spectrum.size(); ++i) {
    const double lambda = basis.full_spectrum(i);
    cumulative += lambda;
    const double energy = basis.total_energy > 0.0 ? cumulative / basis.total_energy : 1.0;
    out += std::to_string(i + 1) + "," + format_double(lambda) + "," +
           format_double(std::sqrt(std::max(lambda, 0.0))) + "," + format_double(energy) + "\n";
  }
  write_text_file(path, out);
}

}  // namespace podrom
