#pragma once

#include <string>
#include <vector>

#include "tailrisk/config.hpp"

namespace tailrisk {

// Stage graph: ingest -> diagnostics; ingest -> garch -> marginals ->
// copulas -> risk; ingest -> spillover. A target runs its chain only.
enum class Stage {
  Ingest,
  Diagnostics,
  Garch,
  Marginals,
  Copulas,
  Risk,
  Spillover,
  All
};

std::string to_string(Stage stage);
Stage stage_from_string(const std::string& name);

struct StageReport {
  Stage stage = Stage::Ingest;
  std::string status;  // ok | failed | skipped | disabled
  std::string detail;  // failure cause or skip reason
};

struct PipelineResult {
  int exit_code = 0;  // 0 ok, 1 config error, 2 data error, 3 numeric failure
  bool complete = false;
  std::vector<StageReport> stages;
  std::vector<std::string> outputs;  // file names written under output_dir
};

// Runs the requested stages, writes the per-stage report files plus
// manifest.json into config.output_dir, and never throws for stage failures:
// a failed stage is recorded, dependents are skipped, and partial outputs
// stay on disk. Everything is deterministic for a fixed (config, seed).
PipelineResult run_pipeline(const PipelineConfig& config,
                            Stage target = Stage::All);

}  // namespace tailrisk
