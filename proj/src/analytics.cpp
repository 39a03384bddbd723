#include "podrom/analytics.hpp"

#include "podrom/csv.hpp"
#include "podrom/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace podrom {

namespace {

Matrix apply_norm(const PodBasis& basis, InnerProduct x, const Matrix& v) {
  if (basis.grid) return weight_tridiagonal(*basis.grid, x, basis.boundary) * v;
  if (x != basis.space) throw InvalidArgument("norm change needs a basis on an FE grid");
  return basis.weight * v;
}

double weighted_sum(const Matrix& r, const Matrix& wr, const Vector& alpha) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < r.cols(); ++j) sum += alpha(j) * r.col(j).dot(wr.col(j));
  return sum;
}

Matrix plain_coordinates(const PodBasis& basis, const SnapshotSet& set) {
  if (basis.grid) return snapshot_coordinates(basis, set);
  return set.matrix();
}

}  // namespace

std::vector<double> proj_error_curve(const SnapshotSet& set, const PodBasis& basis,
                                     std::size_t l_max) {
  if (l_max > basis.size()) throw InvalidArgument("curve longer than the basis");
  Matrix r = plain_coordinates(basis, set);
  const Vector alpha = set.weights();
  const Matrix c = basis.modes.leftCols(static_cast<Eigen::Index>(l_max)).transpose() *
                   apply_norm(basis, basis.space, r);
  std::vector<double> out;
  out.push_back(std::sqrt(std::max(0.0, weighted_sum(r, apply_norm(basis, basis.space, r), alpha))));
  for (std::size_t l = 1; l <= l_max; ++l) {
    const auto i = static_cast<Eigen::Index>(l) - 1;
    r -= basis.modes.col(i) * c.row(i);
    out.push_back(
        std::sqrt(std::max(0.0, weighted_sum(r, apply_norm(basis, basis.space, r), alpha))));
  }
  return out;
}

namespace {

RomErrorCurve error_curve(const SnapshotSet& set, const Matrix& target, const PodBasis& basis,
                          const ModelProblem& problem, const std::vector<std::size_t>& ells,
                          const RomOptions& options, InnerProduct norm) {
  RomErrorCurve curve;
  curve.ells = ells;
  const Vector alpha = Eigen::Map<const Vector>(
      trapezoidal_weights(set.time_grid).data(), static_cast<Eigen::Index>(set.time_grid.size()));
  std::size_t l_max = 0;
  for (auto l : ells) l_max = std::max(l_max, l);
  if (l_max > basis.size()) throw InvalidArgument("error curve needs more modes than the basis has");

  std::optional<RomSystem> full;
  auto ensure_system = [&]() {
    if (!full) full = assemble_rom(basis.truncated(l_max), set, problem, set.time_grid, options);
  };
  for (auto l : ells) {
    double err = std::numeric_limits<double>::quiet_NaN();
    try {
      Matrix approx = Matrix::Zero(target.rows(), target.cols());
      if (l > 0) {
        ensure_system();
        const RomSystem sys = truncate_rom(*full, l);
        const RomTrajectory traj = rom_step_sequence(sys, set.time_grid);
        approx = sys.basis.modes * traj.eta;
      }
      const Matrix r = target - approx;
      err = std::sqrt(std::max(0.0, weighted_sum(r, apply_norm(basis, norm, r), alpha)));
    } catch (const IllPosedRom& e) {
      if (!curve.failed_at) curve.failed_at = l, curve.failure = e.what();
    } catch (const ConvergenceFailure& e) {
      if (!curve.failed_at) curve.failed_at = l, curve.failure = e.what();
    }
    curve.errors.push_back(err);
  }
  return curve;
}

}  // namespace

RomErrorCurve rom_error_curve(const SnapshotSet& set, const PodBasis& basis,
                              const ModelProblem& problem, const std::vector<std::size_t>& ells,
                              const RomOptions& options, std::optional<InnerProduct> norm) {
  const SnapshotSet states = set.ensemble(0);
  if (states.size() != set.time_grid.size()) {
    throw InvalidArgument("error curves need one state per instant of the time grid");
  }
  return error_curve(set, plain_coordinates(basis, states), basis, problem, ells, options,
                     norm.value_or(basis.space));
}

RomErrorCurve reference_error_curve(const SnapshotSet& set, const SnapshotSet& reference,
                                    const PodBasis& basis, const ModelProblem& problem,
                                    const std::vector<std::size_t>& ells,
                                    const RomOptions& options) {
  const SnapshotSet ref = reference.ensemble(0);
  const Matrix fine = plain_coordinates(basis, ref);
  std::vector<double> t_ref;
  for (const auto& e : ref.entries) t_ref.push_back(e.time);
  Matrix target(fine.rows(), static_cast<Eigen::Index>(set.time_grid.size()));
  const double tol = 1e-12 * set.time_grid.horizon();
  for (std::size_t j = 0; j < set.time_grid.size(); ++j) {
    const double t = set.time_grid.t(j);
    if (t < t_ref.front() - tol || t > t_ref.back() + tol) {
      throw InvalidArgument("reference trajectory does not cover the time grid");
    }
    auto it = std::lower_bound(t_ref.begin(), t_ref.end(), t - tol);
    auto k = static_cast<Eigen::Index>(it - t_ref.begin());
    const auto col = static_cast<Eigen::Index>(j);
    if (std::abs(t_ref[static_cast<std::size_t>(k)] - t) <= tol) {
      target.col(col) = fine.col(k);
    } else {
      const double t0 = t_ref[static_cast<std::size_t>(k) - 1];
      const double t1 = t_ref[static_cast<std::size_t>(k)];
      const double s = (t - t0) / (t1 - t0);
      target.col(col) = (1.0 - s) * fine.col(k - 1) + s * fine.col(k);
    }
  }
  return error_curve(set, target, basis, problem, ells, options, basis.space);
}

double plateau_level(const std::vector<double>& curve, std::size_t tail) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t start = curve.size() > tail ? curve.size() - tail : 0;
  for (std::size_t i = start; i < curve.size(); ++i) {
    if (std::isfinite(curve[i])) best = std::min(best, curve[i]);
  }
  return best;
}

ErrorReport build_report(const SnapshotSet& set, const PodBasis& basis,
                         const ModelProblem& problem, const std::vector<std::size_t>& ells,
                         const RomOptions& options) {
  ErrorReport report;
  report.ells = ells;
  report.spectrum = basis.full_spectrum;
  report.total_energy = basis.total_energy;
  report.norms_used = basis.space;
  report.method = basis.method;
  report.treatment = options.treatment;
  std::size_t l_max = 0;
  for (auto l : ells) l_max = std::max(l_max, l);

  const auto trajectory = proj_error_curve(set.ensemble(0), basis, l_max);
  const auto whole = proj_error_curve(set, basis, basis.size());
  for (std::size_t l = 0; l <= basis.size(); ++l) {
    double tail = 0.0;
    for (std::size_t i = l; i < basis.rank; ++i) tail += basis.full_spectrum(static_cast<Eigen::Index>(i));
    const double dev = std::abs(whole[l] * whole[l] - tail) / basis.total_energy;
    report.identity_deviation = std::max(report.identity_deviation, dev);
  }
  for (auto l : ells) {
    report.proj_error.push_back(trajectory[l]);
    report.energy.push_back(energy_fraction(basis, std::min(l, basis.rank)));
  }
  const RomErrorCurve rom = rom_error_curve(set, basis, problem, ells, options);
  report.rom_error = rom.errors;
  report.failed_at = rom.failed_at;
  if (rom.failed_at) report.note = rom.failure;
  return report;
}

void emit_report(const ErrorReport& report, const std::filesystem::path& dir) {
  std::string spectrum = "i,lambda,sigma,energy\n";
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < report.spectrum.size(); ++i) {
    const double lambda = report.spectrum(i);
    cumulative += lambda;
    spectrum += std::to_string(i + 1) + "," + format_double(lambda) + "," +
                format_double(std::sqrt(std::max(lambda, 0.0))) + "," +
                format_double(report.total_energy > 0.0 ? cumulative / report.total_energy : 1.0) +
                "\n";
  }
  write_text_file(dir / "spectrum.csv", spectrum);

  std::string errors = "ell,proj_error,rom_error,energy";
  for (const auto& [name, values] : report.extra_columns) errors += "," + name;
  errors += "\n";
  for (std::size_t k = 0; k < report.ells.size(); ++k) {
    errors += std::to_string(report.ells[k]) + "," + format_double(report.proj_error.at(k)) + "," +
              format_double(report.rom_error.at(k)) + "," + format_double(report.energy.at(k));
    for (const auto& col : report.extra_columns) errors += "," + format_double(col.second.at(k));
    errors += "\n";
  }
  write_text_file(dir / "errors.csv", errors);

  std::string timings = "stage,seconds\n";
  for (const auto& t : report.timings) timings += t.stage + "," + format_double(t.seconds) + "\n";
  timings += "speedup," + format_double(report.speedup) + "\n";
  write_text_file(dir / "timings.csv", timings);

  std::string summary;
  summary += "norm: L2(0,T;" + to_string(report.norms_used) + ")\n";
  summary += "method: " + to_string(report.method) + "\n";
  summary += "treatment: " + to_string(report.treatment) + "\n";
  summary += "total_energy: " + format_double(report.total_energy) + "\n";
  summary += "identity_deviation: " + format_double(report.identity_deviation) + "\n";
  summary += "modes: " + std::to_string(report.ells.empty() ? 0 : report.ells.back()) + "\n";
  if (!report.proj_error.empty()) {
    summary += "proj_error_last: " + format_double(report.proj_error.back()) + "\n";
    summary += "rom_error_last: " + format_double(report.rom_error.back()) + "\n";
  }
  summary += "rom_failed_at: " +
             (report.failed_at ? std::to_string(*report.failed_at) : std::string("none")) + "\n";
  if (!report.note.empty()) summary += "note: " + report.note + "\n";
  write_text_file(dir / "summary.txt", summary);
}

}  // namespace podrom
