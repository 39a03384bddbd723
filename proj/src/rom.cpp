#include "podrom/rom.hpp"

#include "podrom/csv.hpp"
#include "podrom/error.hpp"

#include <cmath>
#include <map>

namespace podrom {

std::string to_string(Treatment t) {
  switch (t) {
    case Treatment::Full:
      return "full";
    case Treatment::Linearized:
      return "linearized";
    case Treatment::Projected:
      return "projected";
    case Treatment::None:
      return "none";
  }
  return "?";
}

Treatment treatment_from_string(const std::string& s) {
  if (s == "full") return Treatment::Full;
  if (s == "linearized") return Treatment::Linearized;
  if (s == "projected") return Treatment::Projected;
  if (s == "none") return Treatment::None;
  throw InvalidArgument("unknown nonlinearity treatment '" + s + "'");
}

std::string to_string(LoadQuadrature q) {
  return q == LoadQuadrature::TimeAveraged ? "time_averaged" : "endpoint";
}

LoadQuadrature load_quadrature_from_string(const std::string& s) {
  if (s == "time_averaged") return LoadQuadrature::TimeAveraged;
  if (s == "endpoint") return LoadQuadrature::Endpoint;
  throw InvalidArgument("unknown load quadrature '" + s + "'");
}

namespace {

// Ensemble-0 states on the basis grid, one column per instant of tgrid.
Matrix expansion_states(const PodBasis& basis, const SnapshotSet& set, const TimeGrid& tgrid) {
  const SnapshotSet states = set.ensemble(0);
  if (states.size() != tgrid.size()) {
    throw InvalidArgument("linearized/projected treatments need one snapshot per ROM instant");
  }
  for (std::size_t j = 0; j < tgrid.size(); ++j) {
    if (states.entries[j].time != tgrid.t(j)) {
      throw InvalidArgument(
          "linearized/projected treatments need the snapshot time grid as ROM grid");
    }
  }
  return snapshot_coordinates(basis, states);
}

}  // namespace

Matrix step_loads(const Grid1D& grid, const ModelProblem& problem, const TimeGrid& tgrid,
                  LoadQuadrature load) {
  const auto nt = static_cast<Eigen::Index>(tgrid.size());
  Matrix out(dof_count(grid, problem.boundary), nt);
  out.col(0) = load_vector(grid, problem, tgrid.t(0));
  const GaussRule& rule = gauss_rule(3);
  for (Eigen::Index j = 1; j < nt; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    if (load == LoadQuadrature::Endpoint) {
      out.col(j) = load_vector(grid, problem, tgrid.t(ju));
      continue;
    }
    const double mid = 0.5 * (tgrid.t(ju - 1) + tgrid.t(ju));
    const double half = 0.5 * tgrid.dt(ju);
    Vector mean = Vector::Zero(out.rows());
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      mean += 0.5 * rule.weights[q] * load_vector(grid, problem, mid + half * rule.points[q]);
    }
    out.col(j) = mean;
  }
  return out;
}

RomSystem assemble_rom(const PodBasis& basis, const SnapshotSet& set,
                       const ModelProblem& problem, const TimeGrid& tgrid,
                       const RomOptions& options, const Matrix* full_loads) {
  problem.validate();
  if (!basis.grid) throw InvalidArgument("ROM assembly needs a basis on an FE grid");
  if (basis.boundary != problem.boundary) {
    throw InvalidArgument("basis and problem use different boundary conditions");
  }
  if (options.treatment == Treatment::None && problem.cubic != 0.0) {
    throw InvalidArgument("treatment 'none' requires a linear problem");
  }
  if (std::abs(tgrid.horizon() - problem.horizon) > 1e-12 * problem.horizon) {
    throw InvalidArgument("ROM time grid does not end at the problem horizon");
  }
  const Grid1D& grid = *basis.grid;
  const Matrix& psi = basis.modes;
  const FeMatrices fe = assemble(grid, problem);
  const Tridiagonal a = fe.operator_matrix(problem);

  RomSystem sys;
  sys.basis = basis;
  sys.options = options;
  sys.time_grid = tgrid;
  sys.cubic = problem.cubic;
  sys.lambda_scale = basis.lambda_scale();
  sys.reduced_mass = psi.transpose() * (fe.mass * psi);
  sys.reduced_mass = 0.5 * (sys.reduced_mass + sys.reduced_mass.transpose()).eval();
  sys.reduced_stiffness = psi.transpose() * (a * psi);

  const auto l = psi.cols();
  const auto nt = static_cast<Eigen::Index>(tgrid.size());
  if (full_loads) {
    if (full_loads->rows() != psi.rows() || full_loads->cols() != nt) {
      throw InvalidArgument("precomputed loads do not match the basis grid and time grid");
    }
    sys.reduced_load = psi.transpose() * *full_loads;
  } else {
    sys.reduced_load = psi.transpose() * step_loads(grid, problem, tgrid, options.load);
  }

  sys.initial_moments = psi.transpose() * moments(grid, problem.boundary, problem.initial);
  sys.reduced_initial =
      l == 0 ? Vector() : Vector(sys.reduced_mass.partialPivLu().solve(sys.initial_moments));

  if (problem.cubic != 0.0 && (options.treatment == Treatment::Linearized ||
                               options.treatment == Treatment::Projected)) {
    const Matrix y = expansion_states(basis, set, tgrid);
    if (options.treatment == Treatment::Linearized) {
      sys.linearized_matrix.resize(tgrid.size());
      sys.linearized_offset = Matrix::Zero(l, nt);
    } else {
      sys.projected_nonlinearity = Matrix::Zero(l, nt);
    }
    for (Eigen::Index j = 0; j < nt; ++j) {
      const Vector yj = y.col(j);
      const Vector nj = cubic_term(grid, problem.boundary, yj, problem.cubic);
      if (options.treatment == Treatment::Projected) {
        sys.projected_nonlinearity.col(j) = psi.transpose() * nj;
        continue;
      }
      const Tridiagonal jac = cubic_jacobian(grid, problem.boundary, yj, problem.cubic);
      sys.linearized_matrix[static_cast<std::size_t>(j)] = psi.transpose() * (jac * psi);
      sys.linearized_offset.col(j) = psi.transpose() * (nj - jac * yj);
    }
  }
  return sys;
}

RomSystem truncate_rom(const RomSystem& sys, std::size_t l) {
  if (l > sys.size()) throw InvalidArgument("cannot truncate a ROM to more modes than it has");
  const auto k = static_cast<Eigen::Index>(l);
  RomSystem out;
  out.basis = sys.basis.truncated(l);
  out.options = sys.options;
  out.time_grid = sys.time_grid;
  out.cubic = sys.cubic;
  out.reduced_mass = sys.reduced_mass.topLeftCorner(k, k);
  out.reduced_stiffness = sys.reduced_stiffness.topLeftCorner(k, k);
  out.reduced_load = sys.reduced_load.topRows(k);
  out.initial_moments = sys.initial_moments.head(k);
  out.reduced_initial =
      k == 0 ? Vector() : Vector(out.reduced_mass.partialPivLu().solve(out.initial_moments));
  out.lambda_scale = sys.lambda_scale.head(k);
  for (const auto& m : sys.linearized_matrix) out.linearized_matrix.push_back(m.topLeftCorner(k, k));
  if (sys.linearized_offset.size() > 0) out.linearized_offset = sys.linearized_offset.topRows(k);
  if (sys.projected_nonlinearity.size() > 0) {
    out.projected_nonlinearity = sys.projected_nonlinearity.topRows(k);
  }
  return out;
}

namespace {

Eigen::PartialPivLU<Matrix> factor(const Matrix& lhs) {
  if (!lhs.allFinite()) throw IllPosedRom("reduced system has nonfinite entries");
  Eigen::PartialPivLU<Matrix> lu(lhs);
  const double rc = lu.rcond();
  if (!(rc >= 1e-14)) {
    throw IllPosedRom("reduced system is numerically singular (rcond " + format_double(rc) + ")");
  }
  return lu;
}

}  // namespace

RomTrajectory rom_step_sequence(const RomSystem& sys, const TimeGrid& tgrid) {
  if (!(tgrid == sys.time_grid)) {
    throw InvalidArgument("ROM was assembled on a different time grid");
  }
  const auto l = static_cast<Eigen::Index>(sys.size());
  const auto nt = static_cast<Eigen::Index>(tgrid.size());
  RomTrajectory traj{Matrix::Zero(l, nt), tgrid, sys.options.treatment};
  if (l == 0) return traj;
  traj.eta.col(0) = sys.reduced_initial;

  const bool nonlinear = sys.cubic != 0.0;
  const Treatment treatment = nonlinear ? sys.options.treatment : Treatment::None;
  const Matrix& psi = sys.basis.modes;
  const Grid1D* grid = sys.basis.grid.get();
  const BoundaryKind boundary = sys.basis.boundary;
  std::map<double, Eigen::PartialPivLU<Matrix>> cache;  // keyed by dt

  for (Eigen::Index j = 1; j < nt; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const double dt = tgrid.dt(ju);
    const Matrix base = sys.reduced_mass + dt * sys.reduced_stiffness;
    Vector rhs = sys.reduced_mass * traj.eta.col(j - 1) + dt * sys.reduced_load.col(j);
    Vector eta;
    switch (treatment) {
      case Treatment::None:
      case Treatment::Projected: {
        if (treatment == Treatment::Projected) rhs -= dt * sys.projected_nonlinearity.col(j);
        auto it = cache.find(dt);
        if (it == cache.end()) it = cache.emplace(dt, factor(base)).first;
        eta = it->second.solve(rhs);
        break;
      }
      case Treatment::Linearized: {
        rhs -= dt * sys.linearized_offset.col(j);
        eta = factor(base + dt * sys.linearized_matrix[ju]).solve(rhs);
        break;
      }
      case Treatment::Full: {
        eta = traj.eta.col(j - 1);
        const double target = sys.options.newton.tol * (1.0 + rhs.norm());
        double residual_norm = 0.0;
        bool converged = false;
        for (int k = 0; k <= sys.options.newton.max_iter; ++k) {
          const Vector y = psi * eta;
          const Vector residual =
              base * eta + dt * (psi.transpose() * cubic_term(*grid, boundary, y, sys.cubic)) -
              rhs;
          residual_norm = residual.norm();
          if (residual_norm <= target) {
            converged = true;
            break;
          }
          if (k == sys.options.newton.max_iter || !residual.allFinite()) break;
          const Tridiagonal jac = cubic_jacobian(*grid, boundary, y, sys.cubic);
          const Matrix lhs = base + dt * (psi.transpose() * (jac * psi));
          eta -= factor(lhs).solve(residual);
        }
        if (!converged) {
          throw ConvergenceFailure("reduced Newton iteration at t = " + format_double(tgrid.t(ju)),
                                   residual_norm);
        }
        break;
      }
    }
    if (!eta.allFinite()) throw IllPosedRom("reduced solution became nonfinite");
    traj.eta.col(j) = eta;
  }
  return traj;
}

SnapshotSet lift(const RomTrajectory& traj, const PodBasis& basis, const GridPtr& target) {
  if (!basis.grid || !target) throw InvalidArgument("lift needs FE grids");
  if (traj.eta.rows() != basis.modes.cols()) {
    throw InvalidArgument("trajectory and basis sizes differ");
  }
  Matrix modes = basis.modes;
  if (!(*target == *basis.grid)) {
    modes.resize(dof_count(*target, basis.boundary), basis.modes.cols());
    for (Eigen::Index i = 0; i < basis.modes.cols(); ++i) {
      const Vector nodal = to_nodal(*basis.grid, basis.boundary, basis.modes.col(i));
      modes.col(i) =
          to_coeffs(*target, basis.boundary, transfer_nodal(*basis.grid, nodal, *target));
    }
  }
  const Matrix y = modes * traj.eta;
  const auto w = trapezoidal_weights(traj.time_grid);
  SnapshotSet set{{}, basis.space, basis.boundary, traj.time_grid};
  for (std::size_t j = 0; j < traj.time_grid.size(); ++j) {
    set.entries.push_back(
        {target, y.col(static_cast<Eigen::Index>(j)), w[j], traj.time_grid.t(j), 0});
  }
  return set;
}

NonlinearityData build_linearization_data(const SnapshotSet& set, const ModelProblem& problem,
                                          std::size_t step) {
  problem.validate();
  if (problem.cubic == 0.0) return {};
  const GridPtr& grid = set.grid();
  const SnapshotSet states = set.ensemble(0);
  if (step >= states.size()) throw InvalidArgument("linearization step out of range");
  const Matrix ytilde = set.matrix() * set.weights().cwiseSqrt().asDiagonal();
  const Vector& yj = states.entries[step].coeffs;
  const Tridiagonal jac = cubic_jacobian(*grid, set.boundary, yj, problem.cubic, 4);
  NonlinearityData d;
  d.n = ytilde.transpose() * cubic_term(*grid, set.boundary, yj, problem.cubic, 4);
  d.n_y = ytilde.transpose() * (jac * yj);
  d.nn_y = ytilde.transpose() * (jac * ytilde);
  return d;
}

std::vector<NonlinearityData> build_linearization_data(const SnapshotSet& set,
                                                       const ModelProblem& problem) {
  std::vector<NonlinearityData> out;
  const std::size_t n = set.ensemble(0).size();
  for (std::size_t j = 0; j < n; ++j) out.push_back(build_linearization_data(set, problem, j));
  return out;
}

Vector linearized_term(const NonlinearityData& data, const PodBasis& basis, const Vector& eta) {
  const Matrix& phi = basis.eigvecs_k;
  const Vector scale = basis.lambda_scale();
  if (data.n.size() != phi.rows() || eta.size() != phi.cols()) {
    throw InvalidArgument("linearization data does not match the basis");
  }
  const Vector lin = data.n + data.nn_y * (phi * scale.cwiseProduct(eta)) - data.n_y;
  return scale.cwiseProduct(phi.transpose() * lin);
}

void write_rom_trajectory_csv(const std::filesystem::path& path, const RomTrajectory& traj) {
  std::string out = "# rom-trajectory v1\n# treatment," + to_string(traj.treatment) + "\nt";
  for (Eigen::Index i = 0; i < traj.eta.rows(); ++i) out += ",eta_" + std::to_string(i + 1);
  out += "\n";
  for (std::size_t j = 0; j < traj.time_grid.size(); ++j) {
    out += format_double(traj.time_grid.t(j));
    for (Eigen::Index i = 0; i < traj.eta.rows(); ++i) {
      out += "," + format_double(traj.eta(i, static_cast<Eigen::Index>(j)));
    }
    out += "\n";
  }
  write_text_file(path, out);
}

RomTrajectory read_rom_trajectory_csv(const std::filesystem::path& path) {
  const auto lines = lines_of(read_text_file(path));
  if (lines.size() < 3 || lines[0] != "# rom-trajectory v1" ||
      lines[1].rfind("# treatment,", 0) != 0) {
    throw IoError(path.string(), "not a ROM trajectory file");
  }
  RomTrajectory traj;
  try {
    traj.treatment = treatment_from_string(lines[1].substr(12));
    std::vector<double> t;
    std::vector<std::vector<double>> cols;
    for (std::size_t k = 3; k < lines.size(); ++k) {
      if (lines[k].empty()) continue;
      const auto fields = split(lines[k]);
      t.push_back(parse_double(fields[0]));
      std::vector<double> c;
      for (std::size_t i = 1; i < fields.size(); ++i) c.push_back(parse_double(fields[i]));
      cols.push_back(std::move(c));
    }
    traj.time_grid = TimeGrid(t);
    const auto l = static_cast<Eigen::Index>(cols.front().size());
    traj.eta.resize(l, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (static_cast<Eigen::Index>(cols[j].size()) != l) {
        throw IoError(path.string(), "ragged trajectory row");
      }
      for (Eigen::Index i = 0; i < l; ++i) {
        traj.eta(i, static_cast<Eigen::Index>(j)) = cols[j][static_cast<std::size_t>(i)];
      }
    }
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(path.string(), e.what());
  }
  return traj;
}

void write_rom_system_csv(const std::filesystem::path& path, const RomSystem& sys) {
  std::string out = "# rom-system v1\n";
  out += "# treatment," + to_string(sys.options.treatment) + "\n";
  out += "# load," + to_string(sys.options.load) + "\n";
  out += "# method," + to_string(sys.basis.method) + "\n";
  auto rows = [&](const std::string& name, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      out += name + "," + join(Vector(m.row(i).transpose())) + "\n";
    }
  };
  rows("mass", sys.reduced_mass);
  rows("stiffness", sys.reduced_stiffness);
  out += "initial," + join(sys.reduced_initial) + "\n";
  out += "lambda_scale," + join(sys.lambda_scale) + "\n";
  write_text_file(path, out);
}

}  // namespace podrom
