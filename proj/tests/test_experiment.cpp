#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "strategem/experiment.hpp"
#include "strategem/scenario.hpp"

using namespace strategem;
namespace fs = std::filesystem;

namespace {

std::string scenario_path(const char* name) {
  return std::string(STRATEGEM_SCENARIO_DIR) + "/" + name;
}

fs::path fresh_dir(const char* tag) {
  fs::path dir = fs::temp_directory_path() /
                 (std::string("strategem_test_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    out.push_back(line);
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    out.push_back(cell);
  }
  return out;
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

}  // namespace

TEST_CASE("simulation runs write one row per draw") {
  Scenario s = parse_scenario(R"({
    "id": "sim",
    "kind": "simulate",
    "scm": {
      "nodes": [
        {"name": "x", "noise": {"law": "gaussian"},
         "equation": {"form": "constant", "value": 0.0}},
        {"name": "y", "noise": {"law": "gaussian"},
         "equation": {"form": "linear",
                      "terms": [{"node": "x", "weight": 2.0}]}}
      ],
      "edges": [["x", "y"]],
      "support_bound": 8.0
    },
    "mc": {"n_outer": 25, "seed": 3}
  })");
  fs::path dir = fresh_dir("sim");
  RunArtifacts art = run_scenario(s, dir.string());

  std::vector<std::string> lines = lines_of(art.csv_text);
  REQUIRE(lines.size() == 2 + 25);
  CHECK(starts_with(lines[0], "# strategem "));
  CHECK(lines[0].find("seed=3") != std::string::npos);
  CHECK(lines[1] == "x,y");
  CHECK(split_csv(lines[2]).size() == 2);

  CHECK(fs::exists(art.csv_path));
  CHECK(fs::exists(art.summary_path));
  CHECK(fs::path(art.summary_path).extension() == ".txt");
  // The summary opens with the same metadata stamp.
  CHECK(lines_of(art.summary_text)[0] == lines[0]);
}

TEST_CASE("the example scenario reports an improvement of one half") {
  Scenario s = load_scenario(scenario_path("example1.json"));
  fs::path dir = fresh_dir("example1");
  RunArtifacts art = run_scenario(s, dir.string());

  std::vector<std::string> lines = lines_of(art.csv_text);
  REQUIRE(lines.size() == 3);
  CHECK(lines[1] == "scenario_id,point,std_error,n,verdict");
  std::vector<std::string> row = split_csv(lines[2]);
  REQUIRE(row.size() == 5);
  CHECK(row[0] == "example1");
  CHECK(std::stod(row[1]) == 0.5);
  CHECK(std::stod(row[2]) <= 1e-12);
  CHECK(row[4] == "Improvement");
  CHECK(art.summary_text.find("verdict=Improvement") != std::string::npos);
  // Every number in the summary already appears in the CSV.
  CHECK(art.summary_text.find("point=" + row[1]) != std::string::npos);
  CHECK(art.summary_text.find("n=" + row[3]) != std::string::npos);
}

TEST_CASE("the counterexample scenario reports gaming") {
  Scenario s = load_scenario(scenario_path("counterexample.json"));
  fs::path dir = fresh_dir("counterexample");
  RunArtifacts art = run_scenario(s, dir.string());

  std::vector<std::string> row = split_csv(lines_of(art.csv_text)[2]);
  REQUIRE(row.size() == 5);
  CHECK(std::stod(row[1]) == 0.0);
  CHECK(row[4] == "Gaming");
}

TEST_CASE("orientation runs emit a call transcript") {
  Scenario s = parse_scenario(R"({
    "id": "orient_chain",
    "kind": "orient",
    "label": "c",
    "scm": {
      "nodes": [
        {"name": "a", "noise": {"law": "gaussian"},
         "equation": {"form": "constant", "value": 0.0}},
        {"name": "b", "noise": {"law": "gaussian"},
         "equation": {"form": "linear",
                      "terms": [{"node": "a", "weight": 1.2}]}},
        {"name": "c", "noise": {"law": "gaussian"},
         "equation": {"form": "linear",
                      "terms": [{"node": "b", "weight": 0.9}]}}
      ],
      "edges": [["a", "b"], ["b", "c"]],
      "support_bound": 10.0
    },
    "mc": {"n_outer": 400, "n_inner": 96, "seed": 17},
    "grid": {"n_candidates": 16, "mesh_size": 16, "cells_per_dim": 8}
  })");
  fs::path dir = fresh_dir("orient");
  RunArtifacts art = run_scenario(s, dir.string());

  std::vector<std::string> lines = lines_of(art.csv_text);
  REQUIRE(lines.size() == 4);
  CHECK(lines[1] ==
        "edge,direction,oracle_outcome,certificate_point,certificate_se,"
        "n_calls");
  std::vector<std::string> first = split_csv(lines[2]);
  std::vector<std::string> second = split_csv(lines[3]);
  REQUIRE(first.size() == 6);
  CHECK(first[0] == "a-b");
  CHECK(first[1] == "a->b");
  CHECK(first[2] == "Classifier");
  CHECK(first[5] == "1");
  CHECK(second[0] == "b-c");
  CHECK(second[1] == "b->c");
  CHECK(second[5] == "2");  // cumulative: one oracle call per edge
  CHECK(art.summary_text.find("oracle calls: 2") != std::string::npos);
}

TEST_CASE("sign recovery runs tabulate every feature") {
  Scenario s = parse_scenario(R"({
    "id": "signs",
    "kind": "sign-recovery",
    "label": "y",
    "scm": {
      "nodes": [
        {"name": "p", "noise": {"law": "gaussian"},
         "equation": {"form": "constant", "value": 0.0}},
        {"name": "q", "noise": {"law": "gaussian"},
         "equation": {"form": "constant", "value": 0.0}},
        {"name": "y", "noise": {"law": "gaussian"},
         "equation": {"form": "linear",
                      "terms": [{"node": "p", "weight": 1.5}]}}
      ],
      "edges": [["p", "y"]],
      "support_bound": 8.0
    },
    "mc": {"seed": 5}
  })");
  fs::path dir = fresh_dir("signs");
  RunArtifacts art = run_scenario(s, dir.string());

  std::vector<std::string> lines = lines_of(art.csv_text);
  REQUIRE(lines.size() == 4);
  CHECK(lines[1] == "feature,causal,sign,probe_plus,probe_minus");
  std::vector<std::string> p_row = split_csv(lines[2]);
  std::vector<std::string> q_row = split_csv(lines[3]);
  CHECK(p_row[0] == "p");
  CHECK(p_row[1] == "1");
  CHECK(p_row[2] == "1");
  CHECK(std::stod(p_row[3]) == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(q_row[0] == "q");
  CHECK(q_row[1] == "0");
  CHECK(q_row[2] == "0");
}

TEST_CASE("bench runs are deterministic in the seed") {
  BenchConfig cfg = parse_bench_config(R"({
    "n_trials": 2,
    "node_range": [3, 3],
    "seed": 21,
    "mc": {"n_outer": 200, "n_inner": 64},
    "grid": {"n_candidates": 8, "mesh_size": 8, "cells_per_dim": 8},
    "probe": {"n_x": 4, "n_alpha": 7},
    "output": "bench_small.csv"
  })");
  fs::path dir_a = fresh_dir("bench_a");
  fs::path dir_b = fresh_dir("bench_b");
  RunArtifacts a = run_bench(cfg, dir_a.string());
  RunArtifacts b = run_bench(cfg, dir_b.string());
  CHECK(a.csv_text == b.csv_text);
  CHECK(a.summary_text == b.summary_text);

  std::vector<std::string> lines = lines_of(a.csv_text);
  REQUIRE(lines.size() == 4);
  CHECK(lines[1] ==
        "trial,n_nodes,n_edges,seed,orient_correct,cost_correct,routes_agree,"
        "oracle_calls,cost_calls");
  std::vector<std::string> row = split_csv(lines[2]);
  REQUIRE(row.size() == 9);
  CHECK(row[1] == "3");

  cfg.mc.seed = 22;
  cfg.grid.mc.seed = 22;
  cfg.probe.mc.seed = 22;
  RunArtifacts c = run_bench(cfg, dir_a.string());
  CHECK(c.csv_text != a.csv_text);
}

TEST_CASE("artifacts land inside nested output directories") {
  Scenario s = load_scenario(scenario_path("counterexample.json"));
  fs::path dir = fresh_dir("nested") / "deep" / "er";
  RunArtifacts art = run_scenario(s, dir.string());
  CHECK(fs::exists(dir / "counterexample.csv"));
  CHECK(fs::exists(dir / "counterexample.txt"));
  CHECK(art.csv_path == (dir / "counterexample.csv").string());
}
