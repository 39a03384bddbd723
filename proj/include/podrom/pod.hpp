#pragma once

// Weighted POD bases: SVD, covariance eigenproblem and method of snapshots,
// plus the cross-mesh Gramian for snapshots on different grids.

#include "podrom/snapshots.hpp"

#include <filesystem>
#include <limits>
#include <string>

namespace podrom {

enum class PodMethod { Svd, EigYYt, EigYtY };

std::string to_string(PodMethod method);
PodMethod pod_method_from_string(const std::string& s);

/// Requests every mode up to the numerical rank.
inline constexpr std::size_t kAllModes = std::numeric_limits<std::size_t>::max();

struct PodBasis {
  Matrix modes;             // Psi, W-orthonormal columns
  Vector eigenvalues;       // lambda_1 >= ... >= lambda_l > 0
  Vector full_spectrum;     // every eigenvalue the route produced, unfiltered
  Matrix eigvecs_k;         // Phi, eigenvectors of the snapshot Gramian (n x l)
  Matrix weight;            // W on the mode coordinates
  Vector snapshot_weights;  // alpha_j of the data the basis was built from
  double total_energy = 0.0;  // sum_j alpha_j ||y_j||_X^2
  std::size_t rank = 0;
  InnerProduct space = InnerProduct::H;
  BoundaryKind boundary = BoundaryKind::Dirichlet;
  PodMethod method = PodMethod::Svd;
  GridPtr grid;  // grid of the mode coefficients; null for plain matrix data

  std::size_t size() const { return static_cast<std::size_t>(modes.cols()); }
  Vector sigma() const { return eigenvalues.cwiseSqrt(); }
  /// Diagonal of Lambda = diag(1 / sqrt(lambda_i)).
  Vector lambda_scale() const { return eigenvalues.cwiseSqrt().cwiseInverse(); }
  /// Leading l modes.
  PodBasis truncated(std::size_t l) const;
};

/// POD of the columns of y in the W inner product with weights alpha.
/// Numerical rank: sigma_i > max(m, n) eps sigma_1 for the SVD route,
/// lambda_i > max(m, n) eps lambda_1 for the eigenvalue routes.
/// Throws RankDeficient when l exceeds the rank.
PodBasis compute_pod(const Matrix& y, const Matrix& w, const Vector& alpha, std::size_t l,
                     PodMethod method);

/// POD of a snapshot set in the X inner product. Sets spanning several grids
/// are supported by EigYtY only (through the cross-mesh Gramian).
PodBasis compute_pod_basis(const SnapshotSet& set, InnerProduct x, std::size_t l,
                           PodMethod method);

/// Dense W for X on a grid: mass (H) or stiffness (V, plus mass for Robin).
Matrix weight_matrix(const Grid1D& grid, InnerProduct x, BoundaryKind boundary);
Tridiagonal weight_tridiagonal(const Grid1D& grid, InnerProduct x, BoundaryKind boundary);

/// K_ij = sqrt(alpha_i alpha_j) <y_i, y_j>_X.
struct CrossGramian {
  Matrix k;
  std::size_t rank = 0;
};

/// Every entry integrates exactly on the union of the two snapshot grids.
/// Rows are distributed over `threads` workers.
CrossGramian cross_gramian(const SnapshotSet& set, InnerProduct x, int threads = 1);

/// Method of snapshots from a Gramian. Modes are expressed on the union grid
/// of all snapshot grids.
PodBasis pod_from_gramian(const CrossGramian& gram, const SnapshotSet& set, InnerProduct x,
                          std::size_t l);

/// E(l) = sum_{i<=l} lambda_i / sum_j alpha_j ||y_j||_X^2.
double energy_fraction(const PodBasis& basis, std::size_t l);
/// Smallest l with E(l) >= target.
std::size_t modes_for_energy(const PodBasis& basis, double target);

struct Projection {
  Matrix coefficients;    // <v, Psi_i>_X, one column per input vector
  Matrix reconstruction;  // sum_i c_i Psi_i
};

/// Projects coefficient columns (in mode coordinates) onto the leading l modes.
Projection project(const PodBasis& basis, const Matrix& v, std::size_t l = kAllModes);

/// sum_j alpha_j ||y_j - P_l y_j||_W^2 from explicit residuals.
double projection_residual(const PodBasis& basis, const Matrix& y, const Vector& alpha,
                           std::size_t l);

/// Snapshot coefficients of a set expressed in the coordinates of the basis
/// grid (exact transfer when the basis lives on a finer union grid).
Matrix snapshot_coordinates(const PodBasis& basis, const SnapshotSet& set);

/// Basis CSV: header lines with space, method and eigenvalues, then rows
/// x,psi_1,...,psi_l over the grid nodes (boundary rows are zero for Dirichlet).
void write_basis_csv(const std::filesystem::path& path, const PodBasis& basis);
/// Spectrum CSV: i,lambda,sigma,energy for every entry of full_spectrum.
void write_spectrum_csv(const std::filesystem::path& path, const PodBasis& basis);

}  // namespace podrom
