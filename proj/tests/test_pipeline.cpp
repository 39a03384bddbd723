#include "podrom/csv.hpp"
#include "podrom/error.hpp"
#include "podrom/pipeline.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

namespace podrom {
namespace {

namespace fs = std::filesystem;

class Pipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("podrom_pipeline_" + std::string(
                 ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  PipelineOverrides out(const std::string& name) const {
    PipelineOverrides o;
    o.out = root_ / name;
    return o;
  }

  fs::path root_;
};

const char* kSmall = R"({
  "name": "small",
  "problem": {"kind": "linear_heat", "domain": [0, 1], "horizon": 0.5,
              "forcing": {"name": "constant", "value": 1},
              "initial": {"name": "sine", "k": 3}},
  "discretization": {"m": 30, "n_t": 21},
  "pod": {"energy": 0.9999},
  "rom": {"max_modes": 6}
})";

std::map<std::string, std::string> summary_of(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& line : lines_of(read_text_file(dir / "summary.txt"))) {
    const auto colon = line.find(": ");
    if (colon != std::string::npos) out[line.substr(0, colon)] = line.substr(colon + 2);
  }
  return out;
}

TEST_F(Pipeline, MalformedConfigWritesNothing) {
  const auto r = run_pipeline_text("{\"name\": \"broken\", ", Stage::All, out("bad"));
  EXPECT_EQ(r.exit_code, kExitConfig);
  EXPECT_FALSE(r.message.empty());
  EXPECT_FALSE(fs::exists(root_ / "bad"));

  std::string text = kSmall;
  text.replace(text.find("\"m\": 30"), 7, "\"m\": 0");
  EXPECT_EQ(run_pipeline_text(text, Stage::All, out("bad")).exit_code, kExitConfig);
  EXPECT_FALSE(fs::exists(root_ / "bad"));
}

TEST_F(Pipeline, FailedRunLeavesNoPartialOutput) {
  std::string text = kSmall;
  text.replace(text.find("{\"energy\": 0.9999}"), 18, "{\"modes\": 25}");
  const auto r = run_pipeline_text(text, Stage::All, out("rank"));
  EXPECT_EQ(r.exit_code, kExitRankDeficient) << r.message;
  EXPECT_FALSE(fs::exists(root_ / "rank"));
  if (fs::exists(root_)) {
    for (const auto& e : fs::directory_iterator(root_)) ADD_FAILURE() << e.path();
  }
}

TEST_F(Pipeline, StagesWriteTheirFiles) {
  const auto sim = run_pipeline_text(kSmall, Stage::Simulate, out("sim"));
  ASSERT_EQ(sim.exit_code, kExitOk) << sim.message;
  EXPECT_EQ(sim.files, std::vector<std::string>{"snapshots.csv"});

  const auto pod = run_pipeline_text(kSmall, Stage::Pod, out("pod"));
  EXPECT_EQ(pod.files, (std::vector<std::string>{"basis.csv", "snapshots.csv", "spectrum.csv"}));

  const auto rom = run_pipeline_text(kSmall, Stage::Rom, out("rom"));
  EXPECT_EQ(rom.files, (std::vector<std::string>{"basis.csv", "rom_system.csv",
                                                 "rom_trajectory.csv", "snapshots.csv",
                                                 "spectrum.csv"}));

  const auto err = run_pipeline_text(kSmall, Stage::Errors, out("err"));
  EXPECT_TRUE(fs::exists(root_ / "err" / "errors.csv"));
  EXPECT_FALSE(fs::exists(root_ / "err" / "summary.txt"));
  for (const auto& f : err.files) EXPECT_TRUE(fs::exists(root_ / "err" / f)) << f;

  const auto snap = run_pipeline_text(kSmall, Stage::Snapopt, out("snap"));
  EXPECT_EQ(snap.exit_code, kExitConfig);
}

TEST_F(Pipeline, DeskPresetProducesFullArtifactSet) {
  const auto r = run_pipeline(preset_config("run-gv1-desk"), Stage::All, out("gv1"));
  ASSERT_EQ(r.exit_code, kExitOk) << r.message;
  for (const char* f : {"snapshots.csv", "basis.csv", "spectrum.csv", "rom_system.csv",
                        "rom_trajectory.csv", "errors.csv", "timings.csv", "summary.txt"}) {
    EXPECT_TRUE(fs::exists(root_ / "gv1" / f)) << f;
  }
  const auto summary = summary_of(root_ / "gv1");
  EXPECT_EQ(summary.at("method"), "svd");
  EXPECT_LE(parse_double(summary.at("identity_deviation")), 1e-8);
  EXPECT_EQ(summary.at("rom_failed_at"), "none");

  // Timing fields are present and positive.
  const auto timing = lines_of(read_text_file(root_ / "gv1" / "timings.csv"));
  ASSERT_GE(timing.size(), 3u);
  for (std::size_t i = 1; i < timing.size(); ++i) {
    EXPECT_GT(parse_double(split(timing[i])[1]), 0.0) << timing[i];
  }
}

TEST_F(Pipeline, FlagPresetWritesOneSpectrumPerMethod) {
  const auto r = run_pipeline(preset_config("run-gv4-flags"), Stage::Pod, out("gv4"));
  ASSERT_EQ(r.exit_code, kExitOk) << r.message;
  for (const char* m : {"svd", "eig_yyt", "eig_yty"}) {
    EXPECT_TRUE(fs::exists(root_ / "gv4" / ("spectrum_" + std::string(m) + ".csv"))) << m;
  }
  const auto rows = lines_of(read_text_file(root_ / "gv4" / "spectrum_agreement.csv"));
  ASSERT_GT(rows.size(), 5u);
  EXPECT_EQ(rows[0], "i,lambda_svd,lambda_eig_yyt,lambda_eig_yty,max_relative_deviation");
  // Leading eigenvalues agree across routes.
  for (std::size_t i = 1; i <= 5; ++i) EXPECT_LE(parse_double(split(rows[i]).back()), 1e-10);
}

TEST_F(Pipeline, RerunIsByteIdentical) {
  const auto config = preset_config("run-cross-mesh");
  const auto a = run_pipeline(config, Stage::All, out("a"));
  const auto b = run_pipeline(config, Stage::All, out("b"));
  ASSERT_EQ(a.exit_code, kExitOk) << a.message;
  ASSERT_EQ(a.files, b.files);
  for (const auto& f : a.files) {
    if (f == "timings.csv") continue;
    EXPECT_EQ(read_text_file(root_ / "a" / f), read_text_file(root_ / "b" / f)) << f;
  }
}

TEST_F(Pipeline, ThreadCountDoesNotChangeResults) {
  const auto config = preset_config("run-cross-mesh");
  PipelineOverrides many = out("many");
  many.threads = 3;
  const auto a = run_pipeline(config, Stage::Pod, out("one"));
  const auto b = run_pipeline(config, Stage::Pod, many);
  ASSERT_EQ(b.exit_code, kExitOk) << b.message;
  for (const auto& f : a.files) {
    EXPECT_EQ(read_text_file(root_ / "one" / f), read_text_file(root_ / "many" / f)) << f;
  }
  PipelineOverrides bad = out("none");
  bad.threads = 0;
  EXPECT_EQ(run_pipeline(config, Stage::Pod, bad).exit_code, kExitConfig);
}

TEST(PipelineStage, NamesRoundTrip) {
  for (Stage s : {Stage::Simulate, Stage::Pod, Stage::Rom, Stage::Errors, Stage::Snapopt,
                  Stage::Report, Stage::All}) {
    EXPECT_EQ(stage_from_string(to_string(s)), s);
  }
  EXPECT_THROW(stage_from_string("plot"), InvalidArgument);
}

}  // namespace
}  // namespace podrom
