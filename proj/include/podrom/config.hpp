#pragma once

// Experiment configuration: JSON text, named data functions and presets.

#include "podrom/snapopt.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace podrom {

/// A catalog function with scalar parameters, e.g. {"name": "sine", "k": 2}.
struct FunctionSpec {
  std::string name = "zero";
  std::map<std::string, double> params;
};

/// Forcing catalog: zero, constant{value}, t3_minus_x2,
/// capped_pole_cosine{cap, pole}, sine{amplitude, k, growth},
/// moving_gaussian{amplitude, width, start, end, rate}.
SpaceTimeFunction make_forcing(const FunctionSpec& spec, double a, double b);
/// Initial-value catalog: zero, constant{value}, indicator{from, to, value},
/// step_pair{from, mid, to}, sine{amplitude, k}, bump{amplitude},
/// gaussian{amplitude, center, width}.
SpaceFunction make_initial(const FunctionSpec& spec, double a, double b);

/// One spatial grid of a cross-mesh run: m interior nodes, interior nodes
/// shifted by up to `perturbation` times the spacing (seeded).
struct GridSpec {
  int m = 0;
  double perturbation = 0.0;
  unsigned long long seed = 0;
};

struct ProblemConfig {
  ProblemKind kind = ProblemKind::LinearHeat;
  double a = 0.0;
  double b = 1.0;
  double horizon = 1.0;
  double diffusivity = 1.0;
  double velocity = 0.0;
  double reaction = 0.0;
  double cubic = 0.0;
  BoundaryKind boundary = BoundaryKind::Dirichlet;
  RobinData robin;
  FunctionSpec forcing;
  FunctionSpec initial;
};

struct PodConfig {
  InnerProduct space = InnerProduct::H;
  PodMethod method = PodMethod::Svd;
  std::optional<std::size_t> modes;   // exactly one of modes / energy
  std::optional<double> energy;
  bool difference_quotients = false;
  std::vector<PodMethod> compare_methods;  // extra spectra, one file each
};

struct RomConfig {
  Treatment treatment = Treatment::None;
  LoadQuadrature load = LoadQuadrature::Endpoint;
  NewtonOptions newton;
  std::size_t max_modes = 0;  // error sweep over 1..max_modes (clamped to the rank)
  std::vector<Treatment> compare_treatments;  // extra ROM error columns
};

struct ErrorsConfig {
  bool cross_norm = false;         // V-norm ROM errors of the basis as extra column
  int reference_refinement = 0;    // > 0: errors against a finer-in-time reference
};

struct SnapoptConfig {
  bool enabled = false;
  std::vector<double> tau0;
  std::size_t modes = 1;
  int reference_n_t = 0;
  InnerProduct space = InnerProduct::V;
  OptimizerOptions optimizer;
};

struct ExperimentConfig {
  std::string name;
  ProblemConfig problem;
  int m = 0;
  int n_t = 0;
  std::vector<GridSpec> grids;  // cross-mesh snapshots when not empty
  PodConfig pod;
  RomConfig rom;
  ErrorsConfig errors;
  SnapoptConfig snapopt;
  std::string output_directory = "out";

  /// Throws InvalidArgument on inconsistent settings.
  void validate() const;
  ModelProblem model_problem() const;
  GridPtr grid() const;
  TimeGrid time_grid() const;
};

/// Parses and validates a config; unknown keys are rejected.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Names of the built-in presets, sorted.
std::vector<std::string> preset_names();
/// JSON text of a preset; throws InvalidArgument for unknown names.
const std::string& preset_text(const std::string& name);
ExperimentConfig preset_config(const std::string& name);

/// Grid of one cross-mesh spec on [a, b].
Grid1D build_grid(double a, double b, const GridSpec& spec);

}  // namespace podrom
