#include "podrom/config.hpp"

#include "podrom/csv.hpp"
#include "podrom/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace podrom {

// Generated from presets/*.json at configure time.
namespace presets {
extern const std::map<std::string, std::string>& table();
}

namespace {

using Json = nlohmann::json;
using std::numbers::pi;

double param(const FunctionSpec& spec, const std::string& key, double fallback) {
  auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

void check_params(const FunctionSpec& spec, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : spec.params) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) ==
        allowed.end()) {
      throw InvalidArgument("function '" + spec.name + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) throw InvalidArgument("parameter '" + key + "' is not finite");
  }
}

}  // namespace

SpaceTimeFunction make_forcing(const FunctionSpec& spec, double a, double b) {
  const double length = b - a;
  if (spec.name == "zero") {
    check_params(spec, {});
    return {[](double, double) { return 0.0; }, {}};
  }
  if (spec.name == "constant") {
    check_params(spec, {"value"});
    const double v = param(spec, "value", 1.0);
    return {[v](double, double) { return v; }, {}};
  }
  if (spec.name == "t3_minus_x2") {
    check_params(spec, {});
    return {[](double t, double x) { return t * t * t - x * x; }, {}};
  }
  if (spec.name == "capped_pole_cosine") {
    check_params(spec, {"cap", "pole"});
    const double cap = param(spec, "cap", 100.0);
    const double pole = param(spec, "pole", 1.0);
    if (!(cap > 0.0)) throw InvalidArgument("capped_pole_cosine needs a positive cap");
    return {[cap, pole](double t, double x) {
              const double z = t == pole ? cap : 1.0 / (pole - t);
              return std::clamp(z, -cap, cap) * std::cos(pi * x);
            },
            {}};
  }
  if (spec.name == "sine") {
    check_params(spec, {"amplitude", "k", "growth"});
    const double amp = param(spec, "amplitude", 1.0);
    const double k = param(spec, "k", 1.0);
    const double growth = param(spec, "growth", 0.0);
    return {[=](double t, double x) {
              return amp * (1.0 + growth * t) * std::sin(k * pi * (x - a) / length);
            },
            {}};
  }
  if (spec.name == "moving_gaussian") {
    check_params(spec, {"amplitude", "width", "start", "end", "rate"});
    const double amp = param(spec, "amplitude", 1.0);
    const double width = param(spec, "width", 0.1 * length);
    const double start = param(spec, "start", a + 0.2 * length);
    const double end = param(spec, "end", a + 0.8 * length);
    const double rate = param(spec, "rate", 1.0);
    if (!(width > 0.0)) throw InvalidArgument("moving_gaussian needs a positive width");
    return {[=](double t, double x) {
              const double centre = start + (end - start) * (1.0 - std::exp(-rate * t));
              const double z = (x - centre) / width;
              return amp * std::exp(-z * z);
            },
            {}};
  }
  throw InvalidArgument("unknown forcing '" + spec.name + "'");
}

SpaceFunction make_initial(const FunctionSpec& spec, double a, double b) {
  const double length = b - a;
  if (spec.name == "zero") {
    check_params(spec, {});
    return {[](double) { return 0.0; }, {}};
  }
  if (spec.name == "constant") {
    check_params(spec, {"value"});
    const double v = param(spec, "value", 1.0);
    return {[v](double) { return v; }, {}};
  }
  if (spec.name == "indicator") {
    check_params(spec, {"from", "to", "value"});
    const double lo = param(spec, "from", a), hi = param(spec, "to", b);
    const double v = param(spec, "value", 1.0);
    if (!(lo < hi)) throw InvalidArgument("indicator needs from < to");
    return {[=](double x) { return (x > lo && x < hi) ? v : 0.0; }, {lo, hi}};
  }
  if (spec.name == "step_pair") {
    check_params(spec, {"from", "mid", "to"});
    const double lo = param(spec, "from", a + 0.25 * length);
    const double mid = param(spec, "mid", a + 0.5 * length);
    const double hi = param(spec, "to", a + 0.75 * length);
    if (!(lo < mid && mid < hi)) throw InvalidArgument("step_pair needs from < mid < to");
    return {[=](double x) {
              if (x > lo && x < mid) return 1.0;
              if (x > mid && x < hi) return -1.0;
              return 0.0;
            },
            {lo, mid, hi}};
  }
  if (spec.name == "sine") {
    check_params(spec, {"amplitude", "k"});
    const double amp = param(spec, "amplitude", 1.0);
    const double k = param(spec, "k", 1.0);
    return {[=](double x) { return amp * std::sin(k * pi * (x - a) / length); }, {}};
  }
  if (spec.name == "bump") {
    check_params(spec, {"amplitude"});
    const double amp = param(spec, "amplitude", 1.0);
    return {[=](double x) { return amp * (x - a) * (b - x) / (length * length); }, {}};
  }
  if (spec.name == "gaussian") {
    check_params(spec, {"amplitude", "center", "width"});
    const double amp = param(spec, "amplitude", 1.0);
    const double centre = param(spec, "center", a + 0.5 * length);
    const double width = param(spec, "width", 0.1 * length);
    if (!(width > 0.0)) throw InvalidArgument("gaussian needs a positive width");
    return {[=](double x) {
              const double z = (x - centre) / width;
              return amp * std::exp(-z * z);
            },
            {}};
  }
  throw InvalidArgument("unknown initial value '" + spec.name + "'");
}

Grid1D build_grid(double a, double b, const GridSpec& spec) {
  if (spec.m < 1) throw InvalidArgument("grid needs at least one interior node");
  if (!(spec.perturbation >= 0.0 && spec.perturbation < 0.5)) {
    throw InvalidArgument("grid perturbation must lie in [0, 0.5)");
  }
  Grid1D uniform = build_grid(a, b, spec.m);
  if (spec.perturbation == 0.0) return uniform;
  std::vector<double> nodes = uniform.nodes();
  const double h = (b - a) / (spec.m + 1);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 1; i + 1 < nodes.size(); ++i) nodes[i] += spec.perturbation * h * u(rng);
  return Grid1D(std::move(nodes));
}

void ExperimentConfig::validate() const {
  if (name.empty()) throw InvalidArgument("config needs a name");
  if (!(problem.a < problem.b)) throw InvalidArgument("domain must satisfy a < b");
  if (m < 1) throw InvalidArgument("discretization.m must be positive");
  if (n_t < 2) throw InvalidArgument("discretization.n_t must be at least 2");
  model_problem().validate();
  (void)make_forcing(problem.forcing, problem.a, problem.b);
  (void)make_initial(problem.initial, problem.a, problem.b);
  for (const auto& g : grids) (void)build_grid(problem.a, problem.b, g);
  if (pod.modes.has_value() == pod.energy.has_value()) {
    throw InvalidArgument("pod needs exactly one of 'modes' and 'energy'");
  }
  if (pod.modes && *pod.modes == 0) throw InvalidArgument("pod.modes must be positive");
  if (pod.energy && !(*pod.energy > 0.0 && *pod.energy <= 1.0)) {
    throw InvalidArgument("pod.energy must lie in (0, 1]");
  }
  if (!grids.empty() && pod.method != PodMethod::EigYtY) {
    throw InvalidArgument("cross-mesh snapshots need pod.method = eig_yty");
  }
  if (!grids.empty() && pod.difference_quotients) {
    throw InvalidArgument("difference quotients need a single snapshot grid");
  }
  if (rom.treatment == Treatment::None && problem.cubic != 0.0) {
    throw InvalidArgument("rom.treatment 'none' requires cubic = 0");
  }
  if (rom.newton.tol <= 0.0 || rom.newton.max_iter < 1) {
    throw InvalidArgument("rom.newton needs tol > 0 and max_iter >= 1");
  }
  if (errors.reference_refinement < 0) {
    throw InvalidArgument("errors.reference_refinement must be nonnegative");
  }
  if (errors.reference_refinement > 0 && !grids.empty()) {
    throw InvalidArgument("reference errors need a single snapshot grid");
  }
  if (snapopt.enabled) {
    if (snapopt.tau0.empty()) throw InvalidArgument("snapopt.tau0 must not be empty");
    for (double t : snapopt.tau0) {
      if (!(t >= 0.0 && t <= problem.horizon)) {
        throw InvalidArgument("snapopt.tau0 entries must lie in [0, T]");
      }
    }
    if (snapopt.modes == 0) throw InvalidArgument("snapopt.modes must be positive");
    if (snapopt.reference_n_t < 2) throw InvalidArgument("snapopt.reference_n_t must be >= 2");
    if (snapopt.optimizer.budget < static_cast<int>(snapopt.tau0.size()) + 1) {
      throw InvalidArgument("snapopt.budget must be at least k + 1");
    }
    if (!grids.empty()) throw InvalidArgument("snapopt needs a single snapshot grid");
  }
  if (output_directory.empty()) throw InvalidArgument("output.directory must not be empty");
}

ModelProblem ExperimentConfig::model_problem() const {
  ModelProblem p;
  p.kind = problem.kind;
  p.diffusivity = problem.diffusivity;
  p.velocity = problem.velocity;
  p.reaction = problem.reaction;
  p.cubic = problem.cubic;
  p.boundary = problem.boundary;
  p.robin = problem.robin;
  p.horizon = problem.horizon;
  p.forcing = make_forcing(problem.forcing, problem.a, problem.b);
  p.initial = make_initial(problem.initial, problem.a, problem.b);
  return p;
}

GridPtr ExperimentConfig::grid() const {
  return std::make_shared<const Grid1D>(build_grid(problem.a, problem.b, m));
}

TimeGrid ExperimentConfig::time_grid() const { return TimeGrid::uniform(problem.horizon, n_t); }

namespace {

// Strict object reader: every key must be consumed.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InvalidArgument(path_ + " must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw InvalidArgument("unknown key '" + path_ + "." + key + "'");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& raw(const std::string& key) {
    if (!has(key)) throw InvalidArgument("missing key '" + path(key) + "'");
    used_.insert(key);
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return as<T>(raw(key), key);
  }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) throw InvalidArgument("missing key '" + path_ + "." + key + "'");
    return as<T>(raw(key), key);
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

 private:
  template <class T>
  T as(const Json& v, const std::string& key) const {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw InvalidArgument("");
        return v.get<double>();
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw InvalidArgument("");
        if (v.is_number_unsigned()) return static_cast<T>(v.get<unsigned long long>());
        const auto x = v.get<long long>();
        if constexpr (std::is_unsigned_v<T>) {
          if (x < 0) throw InvalidArgument("");
        }
        return static_cast<T>(x);
      } else {
        return v.get<T>();
      }
    } catch (const std::exception&) {
      throw InvalidArgument("bad value for '" + path(key) + "'");
    }
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

FunctionSpec read_function(const Json& j, const std::string& path) {
  if (!j.is_object()) throw InvalidArgument(path + " must be an object");
  FunctionSpec spec;
  for (const auto& [key, value] : j.items()) {
    if (key == "name") {
      if (!value.is_string()) throw InvalidArgument(path + ".name must be a string");
      spec.name = value.get<std::string>();
    } else {
      if (!value.is_number()) throw InvalidArgument(path + "." + key + " must be a number");
      spec.params[key] = value.get<double>();
    }
  }
  return spec;
}

std::vector<double> read_numbers(const Json& j, const std::string& path) {
  if (!j.is_array()) throw InvalidArgument(path + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw InvalidArgument(path + " must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

template <class E, class F>
std::vector<E> read_enums(const Json& j, const std::string& path, F from_string) {
  if (!j.is_array()) throw InvalidArgument(path + " must be an array");
  std::vector<E> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw InvalidArgument(path + " must contain strings");
    out.push_back(from_string(v.get<std::string>()));
  }
  return out;
}

void read_problem(Section s, ProblemConfig& p) {
  p.kind = problem_kind_from_string(s.require<std::string>("kind"));
  const auto domain = read_numbers(s.raw("domain"), s.path("domain"));
  if (domain.size() != 2) throw InvalidArgument("problem.domain needs two numbers");
  p.a = domain[0];
  p.b = domain[1];
  p.horizon = s.require<double>("horizon");
  p.diffusivity = s.get("diffusivity", 1.0);
  p.velocity = s.get("velocity", 0.0);
  p.reaction = s.get("reaction", 0.0);
  p.cubic = s.get("cubic", 0.0);
  p.boundary = boundary_from_string(s.get<std::string>("boundary", "dirichlet"));
  if (s.has("robin")) {
    Section r(s.raw("robin"), s.path("robin"));
    p.robin.q_left = r.get("q_left", 0.0);
    p.robin.g_left = r.get("g_left", 0.0);
    p.robin.q_right = r.get("q_right", 0.0);
    p.robin.g_right = r.get("g_right", 0.0);
  }
  if (s.has("forcing")) p.forcing = read_function(s.raw("forcing"), s.path("forcing"));
  if (s.has("initial")) p.initial = read_function(s.raw("initial"), s.path("initial"));
}

void read_discretization(Section s, ExperimentConfig& c) {
  c.m = s.require<int>("m");
  c.n_t = s.require<int>("n_t");
  if (s.has("grids")) {
    const Json& list = s.raw("grids");
    if (!list.is_array()) throw InvalidArgument("discretization.grids must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section g(list[i], s.path("grids[" + std::to_string(i) + "]"));
      c.grids.push_back({g.require<int>("m"), g.get("perturbation", 0.0),
                         g.get<unsigned long long>("seed", 0)});
    }
  }
}

void read_pod(Section s, PodConfig& p) {
  p.space = inner_product_from_string(s.get<std::string>("space", "H"));
  p.method = pod_method_from_string(s.get<std::string>("method", "svd"));
  if (s.has("modes")) p.modes = s.require<std::size_t>("modes");
  if (s.has("energy")) p.energy = s.require<double>("energy");
  p.difference_quotients = s.get("difference_quotients", false);
  if (s.has("compare_methods")) {
    p.compare_methods = read_enums<PodMethod>(s.raw("compare_methods"), s.path("compare_methods"),
                                              pod_method_from_string);
  }
}

void read_rom(Section s, RomConfig& r) {
  r.treatment = treatment_from_string(s.get<std::string>("treatment", "none"));
  r.load = load_quadrature_from_string(s.get<std::string>("load", "endpoint"));
  r.newton.tol = s.get("newton_tol", r.newton.tol);
  r.newton.max_iter = s.get("newton_max_iter", r.newton.max_iter);
  r.max_modes = s.get<std::size_t>("max_modes", 0);
  if (s.has("compare_treatments")) {
    r.compare_treatments = read_enums<Treatment>(s.raw("compare_treatments"),
                                                 s.path("compare_treatments"),
                                                 treatment_from_string);
  }
}

void read_errors(Section s, ErrorsConfig& e) {
  e.cross_norm = s.get("cross_norm", false);
  e.reference_refinement = s.get("reference_refinement", 0);
}

void read_snapopt(Section s, SnapoptConfig& o) {
  o.enabled = s.get("enabled", true);
  o.tau0 = read_numbers(s.raw("tau0"), s.path("tau0"));
  o.modes = s.require<std::size_t>("modes");
  o.reference_n_t = s.require<int>("reference_n_t");
  o.space = inner_product_from_string(s.get<std::string>("space", "V"));
  o.optimizer.method = optimizer_method_from_string(s.get<std::string>("method", "nelder_mead"));
  o.optimizer.budget = s.get("budget", o.optimizer.budget);
  o.optimizer.initial_step = s.get("initial_step", o.optimizer.initial_step);
  o.optimizer.x_tol = s.get("x_tol", o.optimizer.x_tol);
  o.optimizer.f_tol = s.get("f_tol", o.optimizer.f_tol);
  o.optimizer.max_restarts = s.get("max_restarts", o.optimizer.max_restarts);
  o.optimizer.seed = s.get<unsigned long long>("seed", o.optimizer.seed);
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  {
    Section root(j, "config");
    c.name = root.require<std::string>("name");
    read_problem(Section(root.raw("problem"), "problem"), c.problem);
    read_discretization(Section(root.raw("discretization"), "discretization"), c);
    read_pod(Section(root.raw("pod"), "pod"), c.pod);
    if (root.has("rom")) read_rom(Section(root.raw("rom"), "rom"), c.rom);
    if (root.has("errors")) read_errors(Section(root.raw("errors"), "errors"), c.errors);
    if (root.has("snapopt")) read_snapopt(Section(root.raw("snapopt"), "snapopt"), c.snapopt);
    if (root.has("output")) {
      Section out(root.raw("output"), "output");
      c.output_directory = out.get<std::string>("directory", c.output_directory);
      if (out.has("formats")) {
        const Json& formats = out.raw("formats");
        if (!formats.is_array()) throw InvalidArgument("output.formats must be an array");
        for (const auto& f : formats) {
          if (!f.is_string() || (f != "csv" && f != "json")) {
            throw InvalidArgument("output.formats supports 'csv' and 'json'");
          }
        }
      }
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path));
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : presets::table()) names.push_back(name);
  return names;
}

const std::string& preset_text(const std::string& name) {
  const auto& table = presets::table();
  auto it = table.find(name);
  if (it == table.end()) throw InvalidArgument("unknown preset '" + name + "'");
  return it->second;
}

ExperimentConfig preset_config(const std::string& name) { return parse_config(preset_text(name)); }

}  // namespace podrom
