#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "strategem/agent.hpp"
#include "strategem/improvement.hpp"
#include "strategem/incentive_design.hpp"
#include "strategem/monotonic_cost.hpp"
#include "strategem/scm.hpp"

namespace strategem {

enum class ScenarioKind {
  Simulate,
  Improvement,
  Orient,
  OrientCost,
  SignRecovery,
  CheckAssumption
};

const char* scenario_kind_name(ScenarioKind kind);

// A fully resolved experiment description parsed from JSON. Node references
// in the file are by name; they are resolved to indices against the model at
// parse time, so a Scenario that parsed is internally consistent.
struct Scenario {
  std::string id;
  ScenarioKind kind = ScenarioKind::Simulate;
  Scm scm;
  int label = -1;  // required for every kind except simulate
  FeatureSpace features;
  std::shared_ptr<const Classifier> classifier;  // improvement only
  std::shared_ptr<const Cost> cost;              // improvement only
  ActionSet actions = ActionSet::full_space(0);
  Solver solver = ClosedFormSolver{};
  double eps = 0.5;
  McConfig mc;
  ControlGrid grid;      // orient / check-assumption
  CostProbeSpec probe;   // orient-cost
  double sign_margin_z = 3.0;
  std::string output = "out.csv";
  std::uint64_t source_hash = 0;  // hash of the originating JSON text
};

// Parses a scenario from JSON text. Every violation (malformed JSON, missing
// field, unknown node or enum value, model validation failure) raises
// ScenarioError naming the offending field.
Scenario parse_scenario(const std::string& json_text);

// Reads the file and parses it; file-system problems also raise
// ScenarioError.
Scenario load_scenario(const std::string& path);

// Configuration of the randomized orientation benchmark.
struct BenchConfig {
  int n_trials = 20;
  int node_lo = 4;
  int node_hi = 6;
  double edge_probability = 0.5;
  double weight_lo = 0.5;
  double weight_hi = 2.0;
  double eps = 0.5;
  McConfig mc;
  ControlGrid grid;
  CostProbeSpec probe;
  std::string output = "bench.csv";
  std::uint64_t source_hash = 0;
};

BenchConfig parse_bench_config(const std::string& json_text);
BenchConfig load_bench_config(const std::string& path);

// FNV-1a over the raw bytes; used to stamp artifacts with their source.
std::uint64_t content_hash(const std::string& text);

}  // namespace strategem
