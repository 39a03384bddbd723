#pragma once

// Configuration-driven experiment runner: simulate -> pod -> rom -> errors ->
// snapopt -> report, with coded exit statuses.

#include "podrom/config.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace podrom {

/// Process exit statuses of a pipeline run.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,      // unexpected failure
  kExitConfig = 2,        // malformed config or usage error
  kExitSolver = 3,        // Newton failure or singular reduced system
  kExitRankDeficient = 4, // requested modes exceed the snapshot rank
  kExitIo = 5,            // output could not be written
};

/// Each stage recomputes its prerequisites and writes its own files plus
/// those of the stages before it.
enum class Stage { Simulate, Pod, Rom, Errors, Snapopt, Report, All };

std::string to_string(Stage stage);
Stage stage_from_string(const std::string& s);

struct PipelineOverrides {
  std::optional<std::filesystem::path> out;
  std::optional<int> threads;
  std::optional<unsigned long long> seed;  // optimizer seed
};

struct PipelineResult {
  int exit_code = kExitOk;
  std::string message;               // diagnostic for nonzero codes
  std::filesystem::path directory;   // output directory
  std::vector<std::string> files;    // written file names, sorted
};

/// Runs `stage` for a validated config. Files are written to a staging
/// directory and moved into place only after every stage succeeded.
PipelineResult run_pipeline(const ExperimentConfig& config, Stage stage,
                            const PipelineOverrides& overrides = {});

/// Parses JSON text first; parse and validation errors give kExitConfig.
PipelineResult run_pipeline_text(const std::string& config_text, Stage stage,
                                 const PipelineOverrides& overrides = {});

}  // namespace podrom
