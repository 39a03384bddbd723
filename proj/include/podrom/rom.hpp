#pragma once

// Reduced Galerkin models in the span of a POD basis: assembly, implicit-Euler
// stepping with three treatments of the cubic term, and lifting.

#include "podrom/pod.hpp"

#include <filesystem>
#include <string>

namespace podrom {

/// Full: Newton on the reduced system with the cubic evaluated on the full grid.
/// Linearized: first-order expansion around the snapshot state of each step.
/// Projected: cubic of the snapshot state of each step, projected onto the basis.
/// None: linear problems only.
enum class Treatment { Full, Linearized, Projected, None };

std::string to_string(Treatment t);
Treatment treatment_from_string(const std::string& s);

/// Load on the step (t_{j-1}, t_j]: time mean by 3-point Gauss, or F(t_j) as
/// in the full-order implicit Euler scheme.
enum class LoadQuadrature { TimeAveraged, Endpoint };

std::string to_string(LoadQuadrature q);
LoadQuadrature load_quadrature_from_string(const std::string& s);

struct RomOptions {
  Treatment treatment = Treatment::Full;
  LoadQuadrature load = LoadQuadrature::TimeAveraged;
  NewtonOptions newton;
};

/// Reduced operators in mode coordinates. With Psi = Y D^{1/2} Phi Lambda these
/// equal Lambda Phi^T K Phi Lambda, Lambda A^l Lambda, Lambda F^l, Lambda eta_0.
struct RomSystem {
  Matrix reduced_mass;       // Psi^T M Psi
  Matrix reduced_stiffness;  // Psi^T A Psi
  Matrix reduced_load;       // column j: load of the step ending at t_j
  Vector reduced_initial;    // eta(0) with M_r eta(0) = (<y0, Psi_i>_H)_i
  Vector initial_moments;    // (<y0, Psi_i>_H)_i
  Vector lambda_scale;       // 1 / sqrt(lambda_i)
  TimeGrid time_grid;
  RomOptions options;
  PodBasis basis;
  double cubic = 0.0;

  // Linearized treatment, step j: Psi^T J(y_j) Psi and Psi^T (N(y_j) - J(y_j) y_j).
  std::vector<Matrix> linearized_matrix;
  Matrix linearized_offset;
  // Projected treatment, step j: Psi^T N(y_j).
  Matrix projected_nonlinearity;

  std::size_t size() const { return static_cast<std::size_t>(reduced_mass.rows()); }
};

struct RomTrajectory {
  Matrix eta;  // one column per instant
  TimeGrid time_grid;
  Treatment treatment = Treatment::None;
};

/// Linearized and Projected treatments take their expansion states from the
/// ensemble-0 entries of `set`, which must sit on the instants of `tgrid`.
/// `full_loads`, when given, holds the full-order step loads of step_loads
/// on the basis grid and replaces their assembly.
RomSystem assemble_rom(const PodBasis& basis, const SnapshotSet& set,
                       const ModelProblem& problem, const TimeGrid& tgrid,
                       const RomOptions& options, const Matrix* full_loads = nullptr);

/// Full-order load of every step (column j: step ending at t_j, column 0:
/// F(0)), by the given quadrature rule.
Matrix step_loads(const Grid1D& grid, const ModelProblem& problem, const TimeGrid& tgrid,
                  LoadQuadrature load);

/// System of the leading l modes; reduced operators are leading blocks.
RomSystem truncate_rom(const RomSystem& sys, std::size_t l);

/// Implicit Euler: (M_r + dt A_r) eta^j + dt N_r(eta^j) = M_r eta^{j-1} + dt F_r^j.
/// Throws IllPosedRom when a reduced matrix is numerically singular and
/// ConvergenceFailure when Newton stalls.
RomTrajectory rom_step_sequence(const RomSystem& sys, const TimeGrid& tgrid);

/// sum_i eta_i(t_j) Psi_i on `target`, by interpolation when target differs
/// from the basis grid.
SnapshotSet lift(const RomTrajectory& traj, const PodBasis& basis, const GridPtr& target);

/// Pairings against the weighted snapshots y~_k = sqrt(alpha_k) y_k at one
/// linearization state y_j, by 4-point Gauss per element.
struct NonlinearityData {
  Vector n;     // <N(y_j), y~_k>
  Vector n_y;   // <N'(y_j) y_j, y~_k>
  Matrix nn_y;  // <N'(y_j) y~_nu, y~_mu>
};

/// Data for the state of ensemble-0 entry `step`. Empty vectors when c3 = 0.
NonlinearityData build_linearization_data(const SnapshotSet& set, const ModelProblem& problem,
                                          std::size_t step);
/// Data for every ensemble-0 entry.
std::vector<NonlinearityData> build_linearization_data(const SnapshotSet& set,
                                                       const ModelProblem& problem);

/// Lambda Phi^T N + Lambda Phi^T NN_y Phi Lambda eta - Lambda Phi^T N_y.
Vector linearized_term(const NonlinearityData& data, const PodBasis& basis, const Vector& eta);

/// Header: # rom-trajectory v1, # treatment,<name>; columns t,eta_1,...
void write_rom_trajectory_csv(const std::filesystem::path& path, const RomTrajectory& traj);
RomTrajectory read_rom_trajectory_csv(const std::filesystem::path& path);

/// Header with treatment and load rule, then one row per matrix row:
/// mass,..., stiffness,..., and initial,... / lambda_scale,... lines.
void write_rom_system_csv(const std::filesystem::path& path, const RomSystem& sys);

}  // namespace podrom
