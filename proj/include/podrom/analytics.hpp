#pragma once

// Error curves, spectra and timing tables.

#include "podrom/rom.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace podrom {

/// sqrt(sum_j alpha_j ||y_j - P_l y_j||_X^2) for l = 0..l_max, residuals
/// formed explicitly in the coordinates of the basis grid.
std::vector<double> proj_error_curve(const SnapshotSet& set, const PodBasis& basis,
                                     std::size_t l_max);

struct RomErrorCurve {
  std::vector<std::size_t> ells;
  std::vector<double> errors;  // NaN where the ROM failed
  std::optional<std::size_t> failed_at;
  std::string failure;
};

/// sqrt(sum_j alpha_j ||y(t_j) - y^l(t_j)||^2) against the ensemble-0 entries
/// of `set`, one ROM per l on the snapshot time grid. The norm defaults to the
/// basis space. Failures are recorded, not thrown.
RomErrorCurve rom_error_curve(const SnapshotSet& set, const PodBasis& basis,
                              const ModelProblem& problem, const std::vector<std::size_t>& ells,
                              const RomOptions& options,
                              std::optional<InnerProduct> norm = std::nullopt);

/// Same error against a reference trajectory on a finer time grid, sampled at
/// the instants of `set` (linear interpolation between reference instants).
RomErrorCurve reference_error_curve(const SnapshotSet& set, const SnapshotSet& reference,
                                    const PodBasis& basis, const ModelProblem& problem,
                                    const std::vector<std::size_t>& ells,
                                    const RomOptions& options);

/// Smallest level over the tail of a curve, used as its plateau.
double plateau_level(const std::vector<double>& curve, std::size_t tail);

struct TimingRecord {
  std::string stage;
  double seconds = 0.0;
};

/// Wall-clock seconds of `f`, after one discarded warm-up call when `warm_up`.
template <class F>
double time_call(F&& f, bool warm_up = false) {
  if (warm_up) f();
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct ErrorReport {
  std::vector<std::size_t> ells;
  std::vector<double> proj_error;
  std::vector<double> rom_error;
  std::vector<double> energy;  // E(l)
  Vector spectrum;             // lambda_i, every computed value
  double total_energy = 0.0;
  InnerProduct norms_used = InnerProduct::H;
  PodMethod method = PodMethod::Svd;
  Treatment treatment = Treatment::None;
  /// Extra per-l columns (name, values), written after the standard ones.
  std::vector<std::pair<std::string, std::vector<double>>> extra_columns;
  std::vector<TimingRecord> timings;
  double speedup = 0.0;  // full-order time / reduced-order time
  /// Largest |PROJ_full(l)^2 - sum_{i>l} lambda_i| / total over the basis data.
  double identity_deviation = 0.0;
  std::optional<std::size_t> failed_at;
  std::string note;
};

/// Builds the per-l tables for an already computed basis; ROM errors against
/// the ensemble-0 trajectory.
ErrorReport build_report(const SnapshotSet& set, const PodBasis& basis,
                         const ModelProblem& problem, const std::vector<std::size_t>& ells,
                         const RomOptions& options);

/// Writes spectrum.csv, errors.csv, timings.csv and summary.txt into `dir`.
/// Rows follow the order of the report vectors.
void emit_report(const ErrorReport& report, const std::filesystem::path& dir);

}  // namespace podrom
