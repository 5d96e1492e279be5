#pragma once

#include <string>

#include "strategem/scenario.hpp"

namespace strategem {

struct RunArtifacts {
  std::string csv_path;
  std::string summary_path;
  std::string csv_text;
  std::string summary_text;
};

// Runs the scenario and writes its CSV to <out_dir>/<scenario.output> plus a
// plain-text summary with the extension swapped to .txt. Both files begin
// with a '#' metadata line (tool version, seed, source hash); the summary
// restates CSV content and never introduces numbers absent from it. Results
// are computed fully before anything is written and each file lands via a
// temp-file rename, so failures leave no partial artifacts.
RunArtifacts run_scenario(const Scenario& scenario, const std::string& out_dir);

// Random-model orientation benchmark: per trial, draws a linear-Gaussian
// model, runs both orientation routes, and tabulates correctness against the
// generating graph plus oracle call counts. Deterministic per seed and
// independent of the thread count.
RunArtifacts run_bench(const BenchConfig& config, const std::string& out_dir);

}  // namespace strategem
