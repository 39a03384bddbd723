#pragma once

// Implicit-Euler trajectories of the full-order model and weighted snapshot sets.

#include "podrom/mesh.hpp"

#include <filesystem>
#include <vector>

namespace podrom {

/// Instants 0 = t_0 < t_1 < ... < t_{n-1} = T (at least two).
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> instants);

  /// n_t equispaced instants on [0, T].
  static TimeGrid uniform(double horizon, int n_t);

  const std::vector<double>& instants() const { return instants_; }
  std::size_t size() const { return instants_.size(); }
  double t(std::size_t j) const { return instants_[j]; }
  /// Step ending at instant j, j >= 1.
  double dt(std::size_t j) const { return instants_[j] - instants_[j - 1]; }
  double horizon() const { return instants_.back(); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<double> instants_;
};

/// Trapezoid weights: half the first step, interior averages of adjacent
/// steps, half the last step. Their sum is T.
std::vector<double> trapezoidal_weights(const TimeGrid& tgrid);

/// Trapezoid weights of a sorted list of instants that may repeat. A repeated
/// instant adds a zero-length interval, so the weights still sum to the span.
std::vector<double> trapezoidal_weights(const std::vector<double>& sorted_instants);

struct SnapshotEntry {
  GridPtr grid;
  Vector coeffs;  // dof coefficients on `grid`
  double weight = 0.0;
  double time = 0.0;
  int ensemble = 0;  // 0 = states, 1 = difference quotients
};

struct SnapshotSet {
  std::vector<SnapshotEntry> entries;
  InnerProduct inner_product = InnerProduct::H;
  BoundaryKind boundary = BoundaryKind::Dirichlet;
  TimeGrid time_grid;

  std::size_t size() const { return entries.size(); }
  /// True when every entry lives on the same grid.
  bool homogeneous() const;
  /// Common grid; throws UnsupportedOperation for mixed grids.
  const GridPtr& grid() const;
  /// Coefficient columns (homogeneous sets only).
  Matrix matrix() const;
  Vector weights() const;
  /// Entries of one ensemble, in order.
  SnapshotSet ensemble(int index) const;

  /// Throws InvalidArgument on nonpositive weights, nonfinite data or
  /// coefficient vectors that do not fit their grid.
  void validate() const;
};

struct NewtonOptions {
  double tol = 1e-12;
  int max_iter = 30;
};

/// Per-step Newton increments ||delta_k||, recorded when requested.
struct NewtonTrace {
  std::vector<std::vector<double>> increments;
};

/// Implicit-Euler states on `tgrid`, one column per instant. Column 0 is the
/// L2 projection of the initial value.
Matrix integrate_states(const Grid1D& grid, const ModelProblem& problem,
                        const TimeGrid& tgrid, const NewtonOptions& newton = {},
                        NewtonTrace* trace = nullptr);

/// Full trajectory packaged as a snapshot set with trapezoid weights.
SnapshotSet state_solve(const GridPtr& grid, const ModelProblem& problem,
                        const TimeGrid& tgrid, const NewtonOptions& newton = {},
                        InnerProduct x = InnerProduct::H, NewtonTrace* trace = nullptr);

/// Adds the ensemble of backward difference quotients (first one zero) with
/// the weights of the corresponding states.
SnapshotSet append_difference_quotients(const SnapshotSet& set);

/// Text layout:
///   # pod-snapshots v1
///   # inner_product,<H|V>
///   # boundary,<dirichlet|robin>
///   # grid,<index>,<node>,...        (one line per distinct grid)
///   # time_grid,<t>,...
///   t,alpha,ensemble,grid,c0,c1,...
///   <one row per entry>
/// Numbers use the shortest round-trip representation.
void write_snapshots_csv(const std::filesystem::path& path, const SnapshotSet& set);
SnapshotSet read_snapshots_csv(const std::filesystem::path& path);

}  // namespace podrom
