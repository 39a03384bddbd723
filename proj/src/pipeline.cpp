#include "podrom/pipeline.hpp"

#include "podrom/analytics.hpp"
#include "podrom/csv.hpp"
#include "podrom/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unistd.h>

namespace podrom {

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::Simulate: return "simulate";
    case Stage::Pod: return "pod";
    case Stage::Rom: return "rom";
    case Stage::Errors: return "errors";
    case Stage::Snapopt: return "snapopt";
    case Stage::Report: return "report";
    case Stage::All: return "all";
  }
  return "all";
}

Stage stage_from_string(const std::string& s) {
  for (Stage st : {Stage::Simulate, Stage::Pod, Stage::Rom, Stage::Errors, Stage::Snapopt,
                   Stage::Report, Stage::All}) {
    if (to_string(st) == s) return st;
  }
  throw InvalidArgument("unknown stage '" + s + "'");
}

namespace {

namespace fs = std::filesystem;

// Intermediate results of one run. Every stage fills what it needs.
struct Run {
  Run(const ExperimentConfig& c, fs::path dir) : config(c), staging(std::move(dir)) {}

  const ExperimentConfig& config;
  fs::path staging;
  int threads = 1;
  ModelProblem problem;
  TimeGrid tgrid;
  std::vector<GridPtr> grids;  // one grid, or the cross-mesh grids
  SnapshotSet set;             // states, plus difference quotients when requested
  PodBasis full;               // every mode up to the rank
  PodBasis basis;              // selected modes
  std::size_t modes = 0;
  std::vector<TimingRecord> timings;
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& text) {
    write_text_file(staging / name, text);
    files.push_back(name);
  }
  fs::path path(const std::string& name) {
    files.push_back(name);
    return staging / name;
  }
};

bool cross_mesh(const ExperimentConfig& c) { return !c.grids.empty(); }

RomOptions rom_options(const ExperimentConfig& c, Treatment treatment) {
  return {treatment, c.rom.load, c.rom.newton};
}

void simulate(Run& run) {
  const auto& c = run.config;
  run.problem = c.model_problem();
  run.tgrid = c.time_grid();
  const auto weights = trapezoidal_weights(run.tgrid);
  if (!cross_mesh(c)) {
    run.grids = {c.grid()};
    double seconds = 0.0;
    seconds = time_call(
        [&] {
          run.set = state_solve(run.grids[0], run.problem, run.tgrid, c.rom.newton, c.pod.space);
        },
        true);
    run.timings.push_back({"full_order_solve", seconds});
    if (c.pod.difference_quotients) run.set = append_difference_quotients(run.set);
  } else {
    // Snapshot j is taken from the trajectory on grid j mod G.
    for (const auto& spec : c.grids) {
      run.grids.push_back(std::make_shared<const Grid1D>(
          build_grid(c.problem.a, c.problem.b, spec)));
    }
    run.set = SnapshotSet{{}, c.pod.space, run.problem.boundary, run.tgrid};
    std::vector<Matrix> states;
    double seconds = 0.0;
    for (const auto& g : run.grids) {
      seconds += time_call([&] {
        states.push_back(integrate_states(*g, run.problem, run.tgrid, c.rom.newton));
      });
    }
    run.timings.push_back({"full_order_solve", seconds});
    const std::size_t count = run.grids.size();
    for (std::size_t j = 0; j < run.tgrid.size(); ++j) {
      const std::size_t g = j % count;
      run.set.entries.push_back({run.grids[g], states[g].col(static_cast<Eigen::Index>(j)),
                                 weights[j], run.tgrid.t(j), 0});
    }
  }
  run.set.validate();
  write_snapshots_csv(run.path("snapshots.csv"), run.set);
}

PodBasis pod_of(const Run& run, PodMethod method) {
  if (cross_mesh(run.config)) {
    const auto gram = cross_gramian(run.set, run.config.pod.space, run.threads);
    return pod_from_gramian(gram, run.set, run.config.pod.space, kAllModes);
  }
  return compute_pod_basis(run.set, run.config.pod.space, kAllModes, method);
}

void write_spectrum_comparison(Run& run) {
  const auto& c = run.config;
  std::vector<PodMethod> methods = c.pod.compare_methods;
  if (std::find(methods.begin(), methods.end(), c.pod.method) == methods.end()) {
    methods.insert(methods.begin(), c.pod.method);
  }
  std::vector<PodBasis> bases;
  for (PodMethod m : methods) {
    bases.push_back(m == c.pod.method ? run.full : pod_of(run, m));
    write_spectrum_csv(run.path("spectrum_" + to_string(m) + ".csv"), bases.back());
  }
  // Eigenvalues above the rank cutoff of every route, side by side.
  std::size_t common = bases.front().rank;
  for (const auto& b : bases) common = std::min(common, b.rank);
  std::string text = "i";
  for (PodMethod m : methods) text += ",lambda_" + to_string(m);
  text += ",max_relative_deviation\n";
  for (std::size_t i = 0; i < common; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double ref = bases.front().eigenvalues(k);
    double dev = 0.0;
    text += std::to_string(i + 1);
    for (const auto& b : bases) {
      text += "," + format_double(b.eigenvalues(k));
      dev = std::max(dev, std::abs(b.eigenvalues(k) - ref) / ref);
    }
    text += "," + format_double(dev) + "\n";
  }
  run.write("spectrum_agreement.csv", text);
}

void pod(Run& run) {
  const auto& c = run.config;
  run.full = pod_of(run, c.pod.method);
  run.modes = c.pod.modes ? *c.pod.modes : modes_for_energy(run.full, *c.pod.energy);
  if (run.modes > run.full.rank) throw RankDeficient(run.modes, run.full.rank);
  run.basis = run.full.truncated(run.modes);
  write_basis_csv(run.path("basis.csv"), run.basis);
  write_spectrum_csv(run.path("spectrum.csv"), run.full);
  if (!c.pod.compare_methods.empty()) write_spectrum_comparison(run);
}

void rom(Run& run) {
  const auto& c = run.config;
  const RomOptions options = rom_options(c, c.rom.treatment);
  RomSystem sys;
  RomTrajectory traj;
  sys = assemble_rom(run.basis, run.set, run.problem, run.tgrid, options);
  const double seconds = time_call([&] { traj = rom_step_sequence(sys, run.tgrid); }, true);
  run.timings.push_back({"reduced_order_solve", seconds});
  write_rom_system_csv(run.path("rom_system.csv"), sys);
  write_rom_trajectory_csv(run.path("rom_trajectory.csv"), traj);
}

std::vector<std::size_t> sweep(const Run& run) {
  const std::size_t top =
      run.config.rom.max_modes > 0 ? std::min(run.config.rom.max_modes, run.full.rank) : run.modes;
  std::vector<std::size_t> ells(top);
  std::iota(ells.begin(), ells.end(), std::size_t{1});
  return ells;
}

ErrorReport errors(Run& run) {
  const auto& c = run.config;
  const auto ells = sweep(run);
  const PodBasis sweep_basis = run.full.truncated(ells.empty() ? 1 : ells.back());
  ErrorReport report = build_report(run.set, sweep_basis, run.problem, ells,
                                    rom_options(c, c.rom.treatment));
  if (c.errors.cross_norm) {
    const InnerProduct other = c.pod.space == InnerProduct::H ? InnerProduct::V : InnerProduct::H;
    const auto curve = rom_error_curve(run.set, sweep_basis, run.problem, ells,
                                       rom_options(c, c.rom.treatment), other);
    report.extra_columns.push_back({"rom_error_" + to_string(other), curve.errors});
  }
  for (Treatment t : c.rom.compare_treatments) {
    const auto curve = rom_error_curve(run.set, sweep_basis, run.problem, ells, rom_options(c, t));
    report.extra_columns.push_back({"rom_error_" + to_string(t), curve.errors});
  }
  if (c.errors.reference_refinement > 0) {
    const int n_ref = (c.n_t - 1) * c.errors.reference_refinement + 1;
    const TimeGrid fine = TimeGrid::uniform(c.problem.horizon, n_ref);
    const SnapshotSet reference =
        state_solve(run.grids[0], run.problem, fine, c.rom.newton, c.pod.space);
    const auto curve = reference_error_curve(run.set, reference, sweep_basis, run.problem, ells,
                                             rom_options(c, c.rom.treatment));
    report.extra_columns.push_back({"reference_error", curve.errors});
  }
  if (cross_mesh(c)) report.note = "cross-mesh snapshots; errors against the snapshot data";
  return report;
}

void snapopt(Run& run, const PipelineOverrides& overrides) {
  const auto& c = run.config;
  if (!c.snapopt.enabled) throw InvalidArgument("snapopt is not enabled in this config");
  PlacementSetup setup;
  setup.grid = c.grid();
  setup.problem = c.model_problem();
  setup.base_grid = c.time_grid();
  setup.reference_grid = TimeGrid::uniform(c.problem.horizon, c.snapopt.reference_n_t);
  setup.space = c.snapopt.space;
  setup.modes = c.snapopt.modes;
  setup.method = c.pod.method;
  setup.rom = {c.problem.cubic == 0.0 ? Treatment::None : Treatment::Full, LoadQuadrature::Endpoint,
               c.rom.newton};
  OptimizerOptions options = c.snapopt.optimizer;
  if (overrides.seed) options.seed = *overrides.seed;
  const PlacementObjective objective(setup);
  PlacementResult result;
  const double seconds =
      time_call([&] { result = optimize_placement(objective, c.snapopt.tau0, options); });
  run.timings.push_back({"snapshot_optimization", seconds});
  write_trace_csv(run.path("snapopt_trace.csv"), result);
  write_placement_json(run.path("placement.json"), result);
}

void report(Run& run, ErrorReport rep) {
  rep.timings = run.timings;
  double fom = 0.0, rom_time = 0.0;
  for (const auto& t : run.timings) {
    if (t.stage == "full_order_solve") fom = t.seconds;
    if (t.stage == "reduced_order_solve") rom_time = t.seconds;
  }
  rep.speedup = rom_time > 0.0 ? fom / rom_time : 0.0;
  emit_report(rep, run.staging);
  for (const char* f : {"spectrum.csv", "errors.csv", "timings.csv", "summary.txt"}) {
    run.files.push_back(f);
  }
}

fs::path staging_path(const fs::path& out) {
  fs::path target = out.lexically_normal();
  if (target.filename().empty()) target = target.parent_path();
  const std::string name = target.filename().string();
  return target.parent_path() / ("." + name + ".staging-" + std::to_string(::getpid()));
}

void execute(Run& run, Stage stage, const PipelineOverrides& overrides) {
  const bool needs_errors =
      stage == Stage::Errors || stage == Stage::Report || stage == Stage::All;
  if (stage != Stage::Snapopt) {
    simulate(run);
    if (stage == Stage::Simulate) return;
    pod(run);
    if (stage == Stage::Pod) return;
    rom(run);
    if (stage == Stage::Rom) return;
    ErrorReport rep = errors(run);
    if (stage == Stage::Errors) {
      emit_report(rep, run.staging);
      run.files.push_back("errors.csv");
      // errors.csv only; the other report files belong to the report stage.
      fs::remove(run.staging / "timings.csv");
      fs::remove(run.staging / "summary.txt");
      return;
    }
    if (stage == Stage::All && run.config.snapopt.enabled) snapopt(run, overrides);
    if (needs_errors) report(run, std::move(rep));
    return;
  }
  snapopt(run, overrides);
}

PipelineResult fail(int code, const std::string& message) {
  PipelineResult r;
  r.exit_code = code;
  r.message = message;
  return r;
}

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& config, Stage stage,
                            const PipelineOverrides& overrides) {
  PipelineResult result;
  result.directory = overrides.out ? *overrides.out : fs::path(config.output_directory);
  fs::path staging;
  try {
    config.validate();
    if (overrides.threads && *overrides.threads < 1) {
      throw InvalidArgument("--threads must be positive");
    }
    staging = staging_path(result.directory);
    std::error_code ec;
    fs::remove_all(staging, ec);
    fs::create_directories(staging, ec);
    if (ec) throw IoError(staging.string(), "cannot create directory: " + ec.message());

    Run run(config, staging);
    run.threads = overrides.threads.value_or(1);
    execute(run, stage, overrides);

    fs::create_directories(result.directory, ec);
    if (ec) throw IoError(result.directory.string(), "cannot create directory: " + ec.message());
    std::sort(run.files.begin(), run.files.end());
    run.files.erase(std::unique(run.files.begin(), run.files.end()), run.files.end());
    for (const auto& name : run.files) {
      fs::rename(staging / name, result.directory / name, ec);
      if (ec) throw IoError((result.directory / name).string(), "cannot move into place: " + ec.message());
    }
    fs::remove_all(staging, ec);
    result.files = std::move(run.files);
    return result;
  } catch (const InvalidArgument& e) {
    result = fail(kExitConfig, e.what());
  } catch (const UnsupportedOperation& e) {
    result = fail(kExitConfig, e.what());
  } catch (const RankDeficient& e) {
    result = fail(kExitRankDeficient, e.what());
  } catch (const ConvergenceFailure& e) {
    result = fail(kExitSolver, e.what());
  } catch (const IllPosedRom& e) {
    result = fail(kExitSolver, e.what());
  } catch (const IoError& e) {
    result = fail(kExitIo, e.what());
  } catch (const fs::filesystem_error& e) {
    result = fail(kExitIo, e.what());
  } catch (const std::exception& e) {
    result = fail(kExitInternal, e.what());
  }
  if (!staging.empty()) {
    std::error_code ec;
    fs::remove_all(staging, ec);
  }
  result.directory = overrides.out ? *overrides.out : fs::path(config.output_directory);
  return result;
}

PipelineResult run_pipeline_text(const std::string& config_text, Stage stage,
                                 const PipelineOverrides& overrides) {
  ExperimentConfig config;
  try {
    config = parse_config(config_text);
  } catch (const std::exception& e) {
    return fail(kExitConfig, e.what());
  }
  return run_pipeline(config, stage, overrides);
}

}  // namespace podrom
