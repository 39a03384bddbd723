#include "podrom/snapshots.hpp"

#include "podrom/csv.hpp"
#include "podrom/error.hpp"

#include <cmath>

namespace podrom {

TimeGrid::TimeGrid(std::vector<double> instants) : instants_(std::move(instants)) {
  if (instants_.size() < 2) throw InvalidArgument("time grid needs at least two instants");
  if (instants_.front() != 0.0) throw InvalidArgument("time grid must start at 0");
  for (std::size_t j = 1; j < instants_.size(); ++j) {
    if (!(instants_[j] > instants_[j - 1]) || !std::isfinite(instants_[j])) {
      throw InvalidArgument("time grid must be strictly increasing");
    }
  }
}

TimeGrid TimeGrid::uniform(double horizon, int n_t) {
  if (n_t < 2) throw InvalidArgument("uniform time grid needs n_t >= 2");
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  std::vector<double> t(static_cast<std::size_t>(n_t));
  const double dt = horizon / (n_t - 1);
  for (int j = 0; j < n_t; ++j) t[static_cast<std::size_t>(j)] = j * dt;
  t.back() = horizon;
  return TimeGrid(std::move(t));
}

std::vector<double> trapezoidal_weights(const std::vector<double>& t) {
  if (t.size() < 2) throw InvalidArgument("trapezoidal weights need at least two instants");
  std::vector<double> w(t.size(), 0.0);
  for (std::size_t j = 1; j < t.size(); ++j) {
    const double half = 0.5 * (t[j] - t[j - 1]);
    if (half < 0.0) throw InvalidArgument("trapezoidal weights need sorted instants");
    w[j - 1] += half;
    w[j] += half;
  }
  return w;
}

std::vector<double> trapezoidal_weights(const TimeGrid& tgrid) {
  return trapezoidal_weights(tgrid.instants());
}

bool SnapshotSet::homogeneous() const {
  for (const auto& e : entries) {
    if (e.grid != entries.front().grid && !(*e.grid == *entries.front().grid)) return false;
  }
  return true;
}

const GridPtr& SnapshotSet::grid() const {
  if (entries.empty()) throw InvalidArgument("empty snapshot set");
  if (!homogeneous()) throw UnsupportedOperation("snapshot set spans several grids");
  return entries.front().grid;
}

Matrix SnapshotSet::matrix() const {
  const auto& g = grid();
  Matrix y(dof_count(*g, boundary), static_cast<Eigen::Index>(entries.size()));
  for (std::size_t j = 0; j < entries.size(); ++j) {
    y.col(static_cast<Eigen::Index>(j)) = entries[j].coeffs;
  }
  return y;
}

Vector SnapshotSet::weights() const {
  Vector w(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t j = 0; j < entries.size(); ++j) {
    w(static_cast<Eigen::Index>(j)) = entries[j].weight;
  }
  return w;
}

SnapshotSet SnapshotSet::ensemble(int index) const {
  SnapshotSet out{{}, inner_product, boundary, time_grid};
  for (const auto& e : entries) {
    if (e.ensemble == index) out.entries.push_back(e);
  }
  return out;
}

void SnapshotSet::validate() const {
  if (entries.empty()) throw InvalidArgument("empty snapshot set");
  for (const auto& e : entries) {
    if (!e.grid) throw InvalidArgument("snapshot without grid");
    if (e.coeffs.size() != dof_count(*e.grid, boundary)) {
      throw InvalidArgument("snapshot length does not match its grid");
    }
    if (!e.coeffs.allFinite()) throw InvalidArgument("nonfinite snapshot data");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw InvalidArgument("snapshot weights must be positive");
    }
  }
}

Matrix integrate_states(const Grid1D& grid, const ModelProblem& problem,
                        const TimeGrid& tgrid, const NewtonOptions& newton,
                        NewtonTrace* trace) {
  problem.validate();
  if (!(newton.tol > 0.0) || newton.max_iter < 1) {
    throw InvalidArgument("Newton tolerance and iteration budget must be positive");
  }
  if (std::abs(tgrid.horizon() - problem.horizon) > 1e-12 * problem.horizon) {
    throw InvalidArgument("time grid does not end at the problem horizon");
  }
  const FeMatrices fe = assemble(grid, problem);
  const Tridiagonal a = fe.operator_matrix(problem);
  const Tridiagonal& m = fe.mass;
  const double c3 = problem.cubic;

  Matrix y(m.size(), static_cast<Eigen::Index>(tgrid.size()));
  y.col(0) = interpolate_initial(grid, problem);
  if (trace) trace->increments.assign(tgrid.size(), {});

  for (std::size_t j = 1; j < tgrid.size(); ++j) {
    const double dt = tgrid.dt(j);
    const Tridiagonal lhs = m + a * dt;
    const Vector rhs = m * Vector(y.col(static_cast<Eigen::Index>(j) - 1)) +
                       load_vector(grid, problem, tgrid.t(j)) * dt;
    if (c3 == 0.0) {
      y.col(static_cast<Eigen::Index>(j)) = lhs.solve(rhs);
      continue;
    }
    Vector state = y.col(static_cast<Eigen::Index>(j) - 1);
    const double target = newton.tol * (1.0 + rhs.norm());
    double residual_norm = 0.0;
    bool converged = false;
    for (int k = 0; k <= newton.max_iter; ++k) {
      const Vector residual =
          lhs * state + cubic_term(grid, problem.boundary, state, c3) * dt - rhs;
      residual_norm = residual.norm();
      if (residual_norm <= target) {
        converged = true;
        break;
      }
      if (k == newton.max_iter) break;
      const Tridiagonal jac = lhs + cubic_jacobian(grid, problem.boundary, state, c3) * dt;
      const Vector delta = jac.solve(-residual);
      state += delta;
      if (trace) trace->increments[j].push_back(delta.norm());
      if (!state.allFinite()) break;
    }
    if (!converged) {
      throw ConvergenceFailure("implicit Euler Newton iteration at t = " +
                                   format_double(tgrid.t(j)),
                               residual_norm);
    }
    y.col(static_cast<Eigen::Index>(j)) = state;
  }
  return y;
}

SnapshotSet state_solve(const GridPtr& grid, const ModelProblem& problem,
                        const TimeGrid& tgrid, const NewtonOptions& newton, InnerProduct x,
                        NewtonTrace* trace) {
  if (!grid) throw InvalidArgument("state_solve: null grid");
  const Matrix y = integrate_states(*grid, problem, tgrid, newton, trace);
  const auto w = trapezoidal_weights(tgrid);
  SnapshotSet set{{}, x, problem.boundary, tgrid};
  set.entries.reserve(tgrid.size());
  for (std::size_t j = 0; j < tgrid.size(); ++j) {
    set.entries.push_back({grid, y.col(static_cast<Eigen::Index>(j)), w[j], tgrid.t(j), 0});
  }
  return set;
}

SnapshotSet append_difference_quotients(const SnapshotSet& set) {
  if (!set.homogeneous()) {
    throw UnsupportedOperation("difference quotients need snapshots on one grid");
  }
  for (const auto& e : set.entries) {
    if (e.ensemble != 0) throw InvalidArgument("set already has a quotient ensemble");
  }
  SnapshotSet out = set;
  for (std::size_t j = 0; j < set.entries.size(); ++j) {
    SnapshotEntry q = set.entries[j];
    q.ensemble = 1;
    if (j == 0) {
      q.coeffs.setZero();
    } else {
      const auto& prev = set.entries[j - 1];
      q.coeffs = (set.entries[j].coeffs - prev.coeffs) / (set.entries[j].time - prev.time);
    }
    out.entries.push_back(std::move(q));
  }
  return out;
}

void write_snapshots_csv(const std::filesystem::path& path, const SnapshotSet& set) {
  set.validate();
  std::vector<GridPtr> grids;
  std::vector<std::size_t> grid_index;
  for (const auto& e : set.entries) {
    std::size_t k = 0;
    while (k < grids.size() && grids[k] != e.grid && !(*grids[k] == *e.grid)) ++k;
    if (k == grids.size()) grids.push_back(e.grid);
    grid_index.push_back(k);
  }
  std::string out = "# pod-snapshots v1\n";
  out += "# inner_product," + to_string(set.inner_product) + "\n";
  out += "# boundary," + to_string(set.boundary) + "\n";
  for (std::size_t k = 0; k < grids.size(); ++k) {
    out += "# grid," + std::to_string(k) + "," + join(grids[k]->nodes()) + "\n";
  }
  out += "# time_grid," + join(set.time_grid.instants()) + "\n";
  out += "t,alpha,ensemble,grid";
  Eigen::Index width = 0;
  for (const auto& e : set.entries) width = std::max(width, e.coeffs.size());
  for (Eigen::Index i = 0; i < width; ++i) out += ",c" + std::to_string(i);
  out += "\n";
  for (std::size_t j = 0; j < set.entries.size(); ++j) {
    const auto& e = set.entries[j];
    out += format_double(e.time) + "," + format_double(e.weight) + "," +
           std::to_string(e.ensemble) + "," + std::to_string(grid_index[j]) + "," +
           join(e.coeffs) + "\n";
  }
  write_text_file(path, out);
}

namespace {

std::vector<double> parse_numbers(const std::vector<std::string>& fields, std::size_t from) {
  std::vector<double> v;
  for (std::size_t i = from; i < fields.size(); ++i) v.push_back(parse_double(fields[i]));
  return v;
}

}  // namespace

SnapshotSet read_snapshots_csv(const std::filesystem::path& path) {
  const auto lines = lines_of(read_text_file(path));
  if (lines.empty() || lines.front() != "# pod-snapshots v1") {
    throw IoError(path.string(), "not a snapshot file");
  }
  SnapshotSet set;
  std::vector<GridPtr> grids;
  bool header_done = false;
  try {
    for (std::size_t l = 1; l < lines.size(); ++l) {
      const auto& line = lines[l];
      if (line.empty()) continue;
      if (line.rfind("# ", 0) == 0) {
        const auto fields = split(std::string_view(line).substr(2));
        if (fields[0] == "inner_product") {
          set.inner_product = inner_product_from_string(fields.at(1));
        } else if (fields[0] == "boundary") {
          set.boundary = boundary_from_string(fields.at(1));
        } else if (fields[0] == "grid") {
          if (std::stoul(fields.at(1)) != grids.size()) {
            throw IoError(path.string(), "grids out of order");
          }
          grids.push_back(std::make_shared<const Grid1D>(parse_numbers(fields, 2)));
        } else if (fields[0] == "time_grid") {
          set.time_grid = TimeGrid(parse_numbers(fields, 1));
        }
        continue;
      }
      if (!header_done) {
        header_done = true;  // column names
        continue;
      }
      const auto fields = split(line);
      if (fields.size() < 4) throw IoError(path.string(), "short row");
      SnapshotEntry e;
      e.time = parse_double(fields[0]);
      e.weight = parse_double(fields[1]);
      e.ensemble = std::stoi(fields[2]);
      e.grid = grids.at(std::stoul(fields[3]));
      const auto c = parse_numbers(fields, 4);
      e.coeffs = Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size()));
      set.entries.push_back(std::move(e));
    }
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& ex) {
    throw IoError(path.string(), ex.what());
  }
  set.validate();
  return set;
}

}  // namespace podrom
