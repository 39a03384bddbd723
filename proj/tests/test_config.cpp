#include "podrom/config.hpp"
#include "podrom/error.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace podrom {
namespace {

const char* kMinimal = R"({
  "name": "minimal",
  "problem": {"kind": "linear_heat", "domain": [0, 1], "horizon": 1,
              "initial": {"name": "sine", "k": 2}},
  "discretization": {"m": 10, "n_t": 5},
  "pod": {"modes": 2}
})";

std::string with(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

TEST(Config, MinimalConfigUsesDefaults) {
  const auto c = parse_config(kMinimal);
  EXPECT_EQ(c.name, "minimal");
  EXPECT_EQ(c.m, 10);
  EXPECT_EQ(c.n_t, 5);
  EXPECT_EQ(c.pod.space, InnerProduct::H);
  EXPECT_EQ(c.pod.method, PodMethod::Svd);
  EXPECT_EQ(*c.pod.modes, 2u);
  EXPECT_FALSE(c.pod.energy.has_value());
  EXPECT_EQ(c.rom.treatment, Treatment::None);
  EXPECT_FALSE(c.snapopt.enabled);
  EXPECT_EQ(c.grid()->num_nodes(), 12);
  EXPECT_EQ(c.time_grid().size(), 5u);
  const auto p = c.model_problem();
  EXPECT_NEAR(p.initial.eval(0.25), 1.0, 1e-15);
}

TEST(Config, MalformedInputIsRejected) {
  EXPECT_THROW(parse_config("{"), InvalidArgument);
  EXPECT_THROW(parse_config("[]"), InvalidArgument);
  EXPECT_THROW(parse_config(with(kMinimal, "\"horizon\": 1", "\"horizon\": 1, \"extra\": 2")),
               InvalidArgument);
  EXPECT_THROW(parse_config(with(kMinimal, "\"m\": 10", "\"m\": \"ten\"")), InvalidArgument);
  EXPECT_THROW(parse_config(with(kMinimal, "\"m\": 10", "\"m\": -3")), InvalidArgument);
  EXPECT_THROW(parse_config(with(kMinimal, "\"n_t\": 5", "\"n_t\": 1")), InvalidArgument);
  EXPECT_THROW(parse_config(with(kMinimal, "linear_heat", "wave")), InvalidArgument);
  EXPECT_THROW(parse_config(with(kMinimal, "\"domain\": [0, 1]", "\"domain\": [1, 0]")),
               InvalidArgument);
  EXPECT_THROW(parse_config(with(kMinimal, "\"name\": \"sine\"", "\"name\": \"unknown\"")),
               InvalidArgument);
  EXPECT_THROW(parse_config(with(kMinimal, "\"k\": 2", "\"width\": 2")), InvalidArgument);
}

TEST(Config, ModesAndEnergyAreExclusive) {
  EXPECT_THROW(parse_config(with(kMinimal, "{\"modes\": 2}", "{}")), InvalidArgument);
  EXPECT_THROW(parse_config(with(kMinimal, "{\"modes\": 2}", "{\"modes\": 2, \"energy\": 0.9}")),
               InvalidArgument);
  EXPECT_THROW(parse_config(with(kMinimal, "{\"modes\": 2}", "{\"energy\": 1.5}")),
               InvalidArgument);
  const auto c = parse_config(with(kMinimal, "{\"modes\": 2}", "{\"energy\": 0.99}"));
  EXPECT_DOUBLE_EQ(*c.pod.energy, 0.99);
}

TEST(Config, InconsistentSettingsAreRejected) {
  // Cubic term without a nonlinear treatment.
  EXPECT_THROW(parse_config(with(kMinimal, "\"horizon\": 1", "\"horizon\": 1, \"cubic\": 1")),
               InvalidArgument);
  // Cross-mesh snapshots need the method of snapshots.
  EXPECT_THROW(parse_config(with(kMinimal, "\"n_t\": 5",
                                 "\"n_t\": 5, \"grids\": [{\"m\": 10}, {\"m\": 7}]")),
               InvalidArgument);
  // Snapshot instants outside [0, T].
  EXPECT_THROW(parse_config(with(kMinimal, "\"pod\"",
                                 "\"snapopt\": {\"tau0\": [1.5], \"modes\": 1, "
                                 "\"reference_n_t\": 11}, \"pod\"")),
               InvalidArgument);
}

TEST(Config, EveryPresetParses) {
  const auto names = preset_names();
  ASSERT_GE(names.size(), 8u);
  EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
  for (const auto& name : names) {
    const auto c = preset_config(name);
    EXPECT_EQ(c.name, name);
    EXPECT_EQ(c.output_directory, "out/" + name);
  }
  EXPECT_THROW(preset_text("no-such-preset"), InvalidArgument);
}

TEST(Config, PresetsEncodeTheirRuns) {
  const auto gv1 = preset_config("run-gv1-desk");
  EXPECT_EQ(gv1.m, 200);
  EXPECT_EQ(gv1.n_t, 400);
  EXPECT_TRUE(gv1.pod.difference_quotients);
  const auto gv2 = preset_config("run-gv2");
  EXPECT_EQ(gv2.problem.kind, ProblemKind::ConvectionReactionDiffusion);
  EXPECT_DOUBLE_EQ(gv2.problem.diffusivity, 0.025);
  EXPECT_DOUBLE_EQ(gv2.problem.velocity, 1.0);
  EXPECT_DOUBLE_EQ(gv2.problem.reaction, -0.001);
  const auto gv4 = preset_config("run-gv4-flags");
  EXPECT_EQ(gv4.pod.compare_methods.size(), 3u);
  const auto opt = preset_config("run-snapopt-transient");
  EXPECT_TRUE(opt.snapopt.enabled);
  EXPECT_EQ(opt.snapopt.tau0.size(), 2u);
}

TEST(Config, ForcingCatalogValues) {
  const auto f = make_forcing({"t3_minus_x2", {}}, 0.0, 2.0);
  EXPECT_DOUBLE_EQ(f.eval(2.0, 1.5), 8.0 - 2.25);
  const auto pole = make_forcing({"capped_pole_cosine", {{"cap", 100.0}, {"pole", 1.0}}}, 0, 1);
  EXPECT_NEAR(pole.eval(0.5, 0.0), 2.0, 1e-15);
  EXPECT_NEAR(pole.eval(0.999, 0.0), 100.0, 1e-12);
  EXPECT_NEAR(pole.eval(1.0, 0.0), 100.0, 1e-12);
  EXPECT_NEAR(pole.eval(1.5, 1.0), 2.0, 1e-12);
  const auto g = make_forcing({"moving_gaussian", {{"amplitude", 10.0}, {"width", 0.08},
                                                   {"start", 0.2}, {"end", 0.8}, {"rate", 3.0}}},
                              0, 1);
  EXPECT_DOUBLE_EQ(g.eval(0.0, 0.2), 10.0);
  const double centre = 0.2 + 0.6 * (1.0 - std::exp(-3.0));
  EXPECT_NEAR(g.eval(1.0, centre), 10.0, 1e-12);
  EXPECT_THROW(make_forcing({"moving_gaussian", {{"width", 0.0}}}, 0, 1), InvalidArgument);
}

TEST(Config, InitialCatalogValues) {
  const auto step = make_initial({"step_pair", {{"from", 0.5}, {"mid", 1.0}, {"to", 1.5}}}, 0, 2);
  EXPECT_EQ(step.eval(0.75), 1.0);
  EXPECT_EQ(step.eval(1.25), -1.0);
  EXPECT_EQ(step.eval(1.75), 0.0);
  EXPECT_EQ(step.breakpoints, (std::vector<double>{0.5, 1.0, 1.5}));
  const auto bump = make_initial({"bump", {{"amplitude", 4.0}}}, 0, 1);
  EXPECT_DOUBLE_EQ(bump.eval(0.5), 1.0);
  EXPECT_THROW(make_initial({"step_pair", {{"from", 1.0}, {"mid", 0.5}}}, 0, 2), InvalidArgument);
}

TEST(Config, PerturbedGridIsSeededAndOrdered) {
  const GridSpec spec{20, 0.3, 7};
  const Grid1D g1 = build_grid(0.0, 1.0, spec);
  const Grid1D g2 = build_grid(0.0, 1.0, spec);
  EXPECT_EQ(g1, g2);
  EXPECT_NE(g1, build_grid(0.0, 1.0, GridSpec{20, 0.3, 8}));
  EXPECT_EQ(g1.a(), 0.0);
  EXPECT_EQ(g1.b(), 1.0);
  const double h = 1.0 / 21;
  for (Eigen::Index i = 0; i < g1.num_nodes(); ++i) {
    EXPECT_LE(std::abs(g1.node(i) - i * h), 0.3 * h + 1e-15);
  }
  EXPECT_EQ(build_grid(0.0, 1.0, GridSpec{20, 0.0, 7}), build_grid(0.0, 1.0, 20));
  EXPECT_THROW(build_grid(0.0, 1.0, GridSpec{20, 0.5, 0}), InvalidArgument);
}

}  // namespace
}  // namespace podrom
