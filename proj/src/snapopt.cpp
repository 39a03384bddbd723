#include "podrom/snapopt.hpp"

#include "podrom/csv.hpp"
#include "podrom/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace podrom {

SnapshotPlacement make_placement(const TimeGrid& base, std::vector<double> tau) {
  const double horizon = base.horizon();
  for (double t : tau) {
    if (!std::isfinite(t) || t < 0.0 || t > horizon) {
      throw InvalidArgument("snapshot location outside [0, T]");
    }
  }
  SnapshotPlacement p;
  p.tau = std::move(tau);
  p.base_grid = base;
  p.merged_instants = base.instants();
  p.merged_instants.insert(p.merged_instants.end(), p.tau.begin(), p.tau.end());
  std::sort(p.merged_instants.begin(), p.merged_instants.end());
  p.merged_weights = trapezoidal_weights(p.merged_instants);
  return p;
}

TimeGrid SnapshotPlacement::solve_grid() const {
  std::vector<double> distinct = merged_instants;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  return TimeGrid(std::move(distinct));
}

std::vector<double> SnapshotPlacement::distinct_weights() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < merged_instants.size(); ++i) {
    if (i > 0 && merged_instants[i] == merged_instants[i - 1]) {
      out.back() += merged_weights[i];
    } else {
      out.push_back(merged_weights[i]);
    }
  }
  return out;
}

PlacementObjective::PlacementObjective(PlacementSetup setup) : setup_(std::move(setup)) {
  if (!setup_.grid) throw InvalidArgument("placement objective needs a spatial grid");
  if (setup_.modes == 0) throw InvalidArgument("placement objective needs at least one mode");
  if (setup_.rom.treatment == Treatment::Linearized ||
      setup_.rom.treatment == Treatment::Projected) {
    throw InvalidArgument("placement objective supports the full and none treatments only");
  }
  const double horizon = setup_.problem.horizon;
  for (const TimeGrid* g : {&setup_.base_grid, &setup_.reference_grid}) {
    if (std::abs(g->horizon() - horizon) > 1e-12 * horizon) {
      throw InvalidArgument("placement time grids must end at the problem horizon");
    }
  }
  reference_ = integrate_states(*setup_.grid, setup_.problem, setup_.reference_grid,
                                setup_.rom.newton);
  loads_ = step_loads(*setup_.grid, setup_.problem, setup_.reference_grid, setup_.rom.load);
  weight_ = weight_tridiagonal(*setup_.grid, setup_.space, setup_.problem.boundary);
  alpha_ = trapezoidal_weights(setup_.reference_grid);
}

double PlacementObjective::operator()(const std::vector<double>& tau) const {
  const SnapshotPlacement placement = make_placement(setup_.base_grid, tau);
  const TimeGrid solve = placement.solve_grid();
  const std::vector<double> weights = placement.distinct_weights();
  const Matrix states = integrate_states(*setup_.grid, setup_.problem, solve, setup_.rom.newton);

  SnapshotSet set{{}, setup_.space, setup_.problem.boundary, solve};
  for (std::size_t j = 0; j < solve.size(); ++j) {
    set.entries.push_back(
        {setup_.grid, states.col(static_cast<Eigen::Index>(j)), weights[j], solve.t(j), 0});
  }
  const PodBasis basis = compute_pod_basis(set, setup_.space, setup_.modes, setup_.method);
  const RomSystem sys =
      assemble_rom(basis, set, setup_.problem, setup_.reference_grid, setup_.rom, &loads_);
  const RomTrajectory traj = rom_step_sequence(sys, setup_.reference_grid);
  const Matrix r = reference_ - basis.modes * traj.eta;
  const Matrix wr = weight_ * r;
  double sum = 0.0;
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    sum += alpha_[static_cast<std::size_t>(j)] * r.col(j).dot(wr.col(j));
  }
  return sum;
}

std::string to_string(OptimizerMethod m) {
  return m == OptimizerMethod::NelderMead ? "nelder_mead" : "fd_bfgs";
}

OptimizerMethod optimizer_method_from_string(const std::string& s) {
  if (s == "nelder_mead") return OptimizerMethod::NelderMead;
  if (s == "fd_bfgs") return OptimizerMethod::FdBfgs;
  throw InvalidArgument("unknown optimizer '" + s + "'");
}

namespace {

using Point = std::vector<double>;

struct BudgetExhausted {};

class Evaluator {
 public:
  Evaluator(const PlacementObjective& f, int budget, PlacementResult& result)
      : f_(f), budget_(budget), result_(result), horizon_(f.setup().problem.horizon) {}

  Point clamp(Point x) const {
    for (double& v : x) v = std::clamp(v, 0.0, horizon_);
    return x;
  }

  double operator()(const Point& x) {
    if (result_.evaluations >= budget_) throw BudgetExhausted{};
    double value = std::numeric_limits<double>::infinity();
    try {
      value = f_(x);
    } catch (const RankDeficient&) {
    } catch (const IllPosedRom&) {
    } catch (const ConvergenceFailure&) {
    }
    ++result_.evaluations;
    if (value < best_value_) {
      best_value_ = value;
      best_ = x;
    }
    result_.trace.push_back({result_.evaluations, x, value, best_value_});
    return value;
  }

  double horizon() const { return horizon_; }
  const Point& best() const { return best_; }
  double best_value() const { return best_value_; }
  bool exhausted() const { return result_.evaluations >= budget_; }

 private:
  const PlacementObjective& f_;
  int budget_;
  PlacementResult& result_;
  double horizon_;
  Point best_;
  double best_value_ = std::numeric_limits<double>::infinity();
};

Point axpy(double a, const Point& x, const Point& y) {  // a x + y
  Point out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = a * x[i] + y[i];
  return out;
}

Point combine(const Point& c, const Point& x, double coef) {  // c + coef (x - c)
  Point out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i] + coef * (x[i] - c[i]);
  return out;
}

// Returns true on convergence; BudgetExhausted escapes otherwise.
// `start_value` is the objective at the clamped start point.
bool nelder_mead(Evaluator& eval, const Point& start, double start_value,
                 const OptimizerOptions& opt, PlacementResult& result) {
  const std::size_t k = start.size();
  const double horizon = eval.horizon();
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  Point center = eval.clamp(start);
  double step = opt.initial_step * horizon;
  for (int round = 0;; ++round) {
    std::vector<Point> simplex{center};
    for (std::size_t i = 0; i < k; ++i) {
      Point v = center;
      // Step into the box when the vertex would leave it.
      v[i] += (v[i] + step <= horizon) ? step : -step;
      if (round > 0) {
        for (std::size_t d = 0; d < k; ++d) v[d] += 0.1 * step * unit(rng);
      }
      simplex.push_back(eval.clamp(v));
    }
    std::vector<double> values;
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      values.push_back(round == 0 && i == 0 ? start_value : eval(simplex[i]));
    }

    while (true) {
      std::vector<std::size_t> order(k + 1);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      std::vector<Point> s2;
      std::vector<double> v2;
      for (auto i : order) s2.push_back(simplex[i]), v2.push_back(values[i]);
      simplex.swap(s2);
      values.swap(v2);

      double diameter = 0.0;
      for (std::size_t i = 1; i <= k; ++i) {
        for (std::size_t d = 0; d < k; ++d) {
          diameter = std::max(diameter, std::abs(simplex[i][d] - simplex[0][d]));
        }
      }
      const double spread = values[k] - values[0];
      if (diameter <= opt.x_tol * horizon ||
          (std::isfinite(spread) && spread <= opt.f_tol * std::abs(values[0]))) {
        break;
      }

      Point centroid(k, 0.0);
      for (std::size_t i = 0; i < k; ++i) centroid = axpy(1.0 / static_cast<double>(k), simplex[i], centroid);
      const Point xr = eval.clamp(combine(centroid, simplex[k], -1.0));
      const double fr = eval(xr);
      if (fr < values[0]) {
        const Point xe = eval.clamp(combine(centroid, simplex[k], -2.0));
        const double fe = eval(xe);
        if (fe < fr) {
          simplex[k] = xe, values[k] = fe;
        } else {
          simplex[k] = xr, values[k] = fr;
        }
        continue;
      }
      if (fr < values[k - 1]) {
        simplex[k] = xr, values[k] = fr;
        continue;
      }
      const bool outside = fr < values[k];
      const Point xc = eval.clamp(combine(centroid, outside ? xr : simplex[k], 0.5));
      const double fc = eval(xc);
      if (fc < (outside ? fr : values[k])) {
        simplex[k] = xc, values[k] = fc;
        continue;
      }
      for (std::size_t i = 1; i <= k; ++i) {
        simplex[i] = eval.clamp(combine(simplex[0], simplex[i], 0.5));
        values[i] = eval(simplex[i]);
      }
    }

    // Collapsed simplex. The objective is flat away from the dynamics that the
    // base instants miss, so restarts draw a fresh center from the box; the
    // last round polishes the best point with a smaller simplex.
    if (round > opt.max_restarts) return true;
    ++result.restarts;
    if (round == opt.max_restarts) {
      center = eval.best();
      step = 0.25 * opt.initial_step * horizon;
    } else {
      for (double& c : center) c = 0.5 * horizon * (1.0 + unit(rng));
    }
  }
}

Point gradient(Evaluator& eval, const Point& x, double h) {
  Point g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Point lo = x, hi = x;
    lo[i] = std::max(0.0, x[i] - h);
    hi[i] = std::min(eval.horizon(), x[i] + h);
    g[i] = (eval(hi) - eval(lo)) / (hi[i] - lo[i]);
  }
  return g;
}

bool fd_bfgs(Evaluator& eval, const Point& start, double start_value,
             const OptimizerOptions& opt) {
  const std::size_t k = start.size();
  const double horizon = eval.horizon();
  const double h = 1e-3 * horizon;
  Point x = eval.clamp(start);
  double fx = start_value;
  Point g = gradient(eval, x, h);
  const auto kk = static_cast<Eigen::Index>(k);
  const Vector g0 = Eigen::Map<const Vector>(g.data(), kk);
  Matrix hinv = Matrix::Identity(kk, kk) * (opt.initial_step * horizon / std::max(g0.norm(), 1e-300));
  while (true) {
    const Vector gv = Eigen::Map<const Vector>(g.data(), kk);
    const Vector d = -hinv * gv;
    double s = 1.0;
    Point xn;
    double fn = 0.0;
    bool accepted = false;
    for (int tries = 0; tries < 20; ++tries, s *= 0.5) {
      Point trial(k);
      for (std::size_t i = 0; i < k; ++i) trial[i] = x[i] + s * d(static_cast<Eigen::Index>(i));
      xn = eval.clamp(trial);
      double decrease = 0.0;
      for (std::size_t i = 0; i < k; ++i) decrease += g[i] * (xn[i] - x[i]);
      fn = eval(xn);
      if (fn <= fx + 1e-4 * decrease && fn < fx) {
        accepted = true;
        break;
      }
    }
    if (!accepted) return true;
    double moved = 0.0;
    for (std::size_t i = 0; i < k; ++i) moved = std::max(moved, std::abs(xn[i] - x[i]));
    const Point gn = gradient(eval, xn, h);
    Vector sv(kk), yv(kk);
    for (std::size_t i = 0; i < k; ++i) {
      sv(static_cast<Eigen::Index>(i)) = xn[i] - x[i];
      yv(static_cast<Eigen::Index>(i)) = gn[i] - g[i];
    }
    const double sy = sv.dot(yv);
    if (sy > 1e-14 * sv.norm() * yv.norm()) {
      const Matrix id = Matrix::Identity(kk, kk);
      const Matrix left = id - sv * yv.transpose() / sy;
      hinv = left * hinv * left.transpose() + sv * sv.transpose() / sy;
    }
    x = xn, fx = fn, g = gn;
    if (moved <= opt.x_tol * horizon) return true;
  }
}

}  // namespace

PlacementResult optimize_placement(const PlacementObjective& objective, const Point& tau0,
                                   const OptimizerOptions& options) {
  const auto k = static_cast<int>(tau0.size());
  if (k < 1) throw InvalidArgument("placement optimization needs at least one location");
  if (options.budget < k + 1) throw InvalidArgument("evaluation budget below k + 1");
  PlacementResult result;
  result.method = options.method;
  Evaluator eval(objective, options.budget, result);
  bool converged = false;
  try {
    result.initial_objective = eval(eval.clamp(tau0));
    converged = options.method == OptimizerMethod::NelderMead
                    ? nelder_mead(eval, tau0, result.initial_objective, options, result)
                    : fd_bfgs(eval, tau0, result.initial_objective, options);
  } catch (const BudgetExhausted&) {
    converged = false;
  }
  result.incomplete = !converged;
  if (!std::isfinite(eval.best_value())) {
    throw IllPosedRom("no snapshot placement produced a solvable reduced model");
  }
  result.objective = eval.best_value();
  result.placement = make_placement(objective.setup().base_grid, eval.best());
  return result;
}

std::vector<double> objective_gradient(const PlacementObjective& objective,
                                       const std::vector<double>& tau, double h) {
  const double step = h * objective.setup().problem.horizon;
  std::vector<double> g(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    Point lo = tau, hi = tau;
    lo[i] -= step;
    hi[i] += step;
    g[i] = (objective(hi) - objective(lo)) / (2.0 * step);
  }
  return g;
}

void write_trace_csv(const std::filesystem::path& path, const PlacementResult& result) {
  const std::size_t k = result.placement.tau.size();
  std::string text = "evaluation";
  for (std::size_t i = 0; i < k; ++i) text += ",tau_" + std::to_string(i + 1);
  text += ",objective,best\n";
  for (const auto& e : result.trace) {
    text += std::to_string(e.evaluation);
    for (double t : e.tau) text += "," + format_double(t);
    text += "," + format_double(e.objective) + "," + format_double(e.best) + "\n";
  }
  write_text_file(path, text);
}

void write_placement_json(const std::filesystem::path& path, const PlacementResult& result) {
  nlohmann::ordered_json j;
  j["method"] = to_string(result.method);
  j["tau"] = result.placement.tau;
  j["merged_instants"] = result.placement.merged_instants;
  j["merged_weights"] = result.placement.merged_weights;
  j["objective"] = result.objective;
  j["initial_objective"] = result.initial_objective;
  j["reduction"] = result.initial_objective > 0.0 && std::isfinite(result.initial_objective)
                       ? 1.0 - result.objective / result.initial_objective
                       : 0.0;
  j["evaluations"] = result.evaluations;
  j["restarts"] = result.restarts;
  j["incomplete"] = result.incomplete;
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace podrom
