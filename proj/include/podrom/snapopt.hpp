#pragma once

// Placement of additional snapshot instants that minimizes the ROM error.

#include "podrom/rom.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace podrom {

/// Base instants plus k extra instants tau in [0, T]. The merged list keeps
/// multiplicity; its trapezoid weights sum to T.
struct SnapshotPlacement {
  std::vector<double> tau;
  TimeGrid base_grid;
  std::vector<double> merged_instants;  // sorted, repeats kept
  std::vector<double> merged_weights;

  /// Distinct merged instants and the summed weight of each.
  TimeGrid solve_grid() const;
  std::vector<double> distinct_weights() const;
};

/// Throws InvalidArgument for tau outside [0, T] or nonfinite entries.
SnapshotPlacement make_placement(const TimeGrid& base, std::vector<double> tau);

struct PlacementSetup {
  GridPtr grid;
  ModelProblem problem;
  TimeGrid base_grid;
  TimeGrid reference_grid;  // ROM and reference trajectory live here
  InnerProduct space = InnerProduct::V;
  std::size_t modes = 1;
  PodMethod method = PodMethod::Svd;
  RomOptions rom{Treatment::Full, LoadQuadrature::Endpoint, {}};
};

/// Squared discrete L2(0,T;X) error on the reference grid between the
/// full-order trajectory and the ROM built from the snapshots at the merged
/// instants (full-order re-solve on the union time grid).
class PlacementObjective {
 public:
  explicit PlacementObjective(PlacementSetup setup);

  /// Throws RankDeficient when the merged set has rank below the mode count,
  /// and the ROM errors of rom_step_sequence.
  double operator()(const std::vector<double>& tau) const;
  double baseline() const { return (*this)({}); }

  const PlacementSetup& setup() const { return setup_; }
  const Matrix& reference_states() const { return reference_; }

 private:
  PlacementSetup setup_;
  Matrix reference_;
  Matrix loads_;
  Tridiagonal weight_;
  std::vector<double> alpha_;
};

enum class OptimizerMethod { NelderMead, FdBfgs };
std::string to_string(OptimizerMethod m);
OptimizerMethod optimizer_method_from_string(const std::string& s);

struct OptimizerOptions {
  OptimizerMethod method = OptimizerMethod::NelderMead;
  int budget = 600;               // objective evaluations
  double initial_step = 0.1;      // simplex edge / first BFGS step, fraction of T
  double x_tol = 1e-4;            // simplex diameter, fraction of T
  double f_tol = 1e-10;           // relative spread of simplex values
  int max_restarts = 6;           // random restarts, then one polishing round
  unsigned long long seed = 0;    // restart centers and simplex jitter
};

struct TraceEntry {
  int evaluation = 0;
  std::vector<double> tau;
  double objective = 0.0;  // +inf when the ROM failed at tau
  double best = 0.0;       // best objective so far
};

struct PlacementResult {
  SnapshotPlacement placement;
  double objective = 0.0;
  double initial_objective = 0.0;
  std::vector<TraceEntry> trace;
  int evaluations = 0;
  int restarts = 0;
  bool incomplete = false;  // budget ran out before convergence
  OptimizerMethod method = OptimizerMethod::NelderMead;
};

/// Box-constrained minimization over [0, T]^k starting at tau0 (k >= 1,
/// budget >= k + 1). Nelder-Mead rounds: one from tau0, max_restarts from
/// seeded random centers, one polishing round around the best point. Failed
/// evaluations count as +inf. Deterministic for a given tau0 and seed.
PlacementResult optimize_placement(const PlacementObjective& objective,
                                   const std::vector<double>& tau0,
                                   const OptimizerOptions& options = {});

/// Central differences of the objective with relative step h (fraction of T).
std::vector<double> objective_gradient(const PlacementObjective& objective,
                                       const std::vector<double>& tau, double h);

/// Columns: evaluation,tau_1,...,tau_k,objective,best.
void write_trace_csv(const std::filesystem::path& path, const PlacementResult& result);
/// JSON object with tau, merged instants and weights, objective values and flags.
void write_placement_json(const std::filesystem::path& path, const PlacementResult& result);

}  // namespace podrom
