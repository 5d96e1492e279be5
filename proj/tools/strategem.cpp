#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "strategem/errors.hpp"
#include "strategem/experiment.hpp"
#include "strategem/version.hpp"

namespace {

struct CommonArgs {
  std::string path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_out) {
  cmd->add_option("file", args.path, "Configuration file (JSON)")
      ->required();
  args.seed_opt =
      cmd->add_option("--seed", args.seed,
                      "Override the seed recorded in the file");
  if (with_out) {
    cmd->add_option("--out", args.out_dir, "Output directory");
  }
  cmd->add_option("--threads", args.threads,
                  "Worker threads (results are thread-count independent)")
      ->envname("STRATEGEM_THREADS")
      ->check(CLI::PositiveNumber);
}

void apply_overrides(strategem::McConfig& mc, const CommonArgs& args) {
  if (args.seed_opt->count() > 0) {
    mc.seed = args.seed;
  }
  mc.threads = args.threads;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("strategem ") + strategem::kVersionString +
               ": counterfactual simulation and incentive-design experiments"};
  app.require_subcommand(1);

  CommonArgs run_args;
  CLI::App* run_cmd =
      app.add_subcommand("run", "Run a scenario and write CSV + summary");
  add_common(run_cmd, run_args, true);

  CommonArgs bench_args;
  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "Random-model orientation benchmark over both routes");
  add_common(bench_cmd, bench_args, true);

  CommonArgs validate_args;
  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "Parse and validate a scenario without running it");
  add_common(validate_cmd, validate_args, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      strategem::Scenario s = strategem::load_scenario(run_args.path);
      apply_overrides(s.mc, run_args);
      s.grid.mc = s.mc;
      s.probe.mc = s.mc;
      strategem::RunArtifacts arts = strategem::run_scenario(s, run_args.out_dir);
      std::cout << arts.csv_path << "\n" << arts.summary_path << "\n";
    } else if (bench_cmd->parsed()) {
      strategem::BenchConfig cfg =
          strategem::load_bench_config(bench_args.path);
      apply_overrides(cfg.mc, bench_args);
      cfg.grid.mc = cfg.mc;
      cfg.probe.mc = cfg.mc;
      strategem::RunArtifacts arts = strategem::run_bench(cfg, bench_args.out_dir);
      std::cout << arts.csv_path << "\n" << arts.summary_path << "\n";
    } else {
      strategem::Scenario s = strategem::load_scenario(validate_args.path);
      std::cout << "ok id=" << s.id
                << " kind=" << strategem::scenario_kind_name(s.kind)
                << " nodes=" << s.scm.node_count() << "\n";
    }
  } catch (const strategem::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
