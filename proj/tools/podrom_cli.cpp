// Command-line runner for experiment configs and built-in presets.
//
// Exit codes: 0 success, 1 internal error, 2 config or usage error,
// 3 solver failure, 4 rank deficiency, 5 output I/O error.

#include "podrom/csv.hpp"
#include "podrom/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace podrom;

  CLI::App app{"POD reduced-order modelling experiments"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string preset;
  std::string out;
  int threads = 0;
  unsigned long long seed = 0;

  const auto add_flags = [&](CLI::App* cmd) {
    auto* c = cmd->add_option("--config", config_path, "experiment config (JSON)");
    auto* p = cmd->add_option("--preset", preset, "built-in preset name");
    c->excludes(p);
    cmd->add_option("--out", out, "output directory (overrides the config)");
    cmd->add_option("--threads", threads, "worker threads for Gramian assembly")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "optimizer seed (overrides the config)");
  };

  std::vector<std::pair<CLI::App*, Stage>> stages;
  for (Stage stage : {Stage::Simulate, Stage::Pod, Stage::Rom, Stage::Errors, Stage::Snapopt,
                      Stage::Report, Stage::All}) {
    auto* cmd = app.add_subcommand(to_string(stage), "run the pipeline up to " + to_string(stage));
    add_flags(cmd);
    stages.emplace_back(cmd, stage);
  }
  auto* list = app.add_subcommand("presets", "list built-in presets");
  auto* show = app.add_subcommand("show-preset", "print the JSON of a preset");
  std::string show_name;
  show->add_option("name", show_name, "preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (list->parsed()) {
    for (const auto& name : preset_names()) std::cout << name << "\n";
    return kExitOk;
  }
  if (show->parsed()) {
    try {
      std::cout << preset_text(show_name);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfig;
    }
    return kExitOk;
  }

  Stage stage = Stage::All;
  CLI::App* chosen = nullptr;
  for (const auto& [cmd, st] : stages) {
    if (cmd->parsed()) {
      stage = st;
      chosen = cmd;
    }
  }
  if (!chosen) {
    std::cerr << app.help();
    return kExitConfig;
  }
  if (config_path.empty() == preset.empty()) {
    std::cerr << "error: give exactly one of --config and --preset\n";
    return kExitConfig;
  }

  std::string text;
  try {
    text = config_path.empty() ? preset_text(preset) : read_text_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  PipelineOverrides overrides;
  if (!out.empty()) overrides.out = out;
  if (chosen->count("--threads")) overrides.threads = threads;
  if (chosen->count("--seed")) overrides.seed = seed;

  const PipelineResult result = run_pipeline_text(text, stage, overrides);
  if (result.exit_code != kExitOk) {
    std::cerr << "error: " << result.message << "\n";
    return result.exit_code;
  }
  std::cout << "wrote " << result.files.size() << " files to " << result.directory.string()
            << "\n";
  for (const auto& f : result.files) std::cout << "  " << f << "\n";
  return kExitOk;
}
