#include "strategem/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "strategem/errors.hpp"
#include "strategem/version.hpp"

namespace strategem {

namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kCheckTag = 0x43484543;
constexpr std::uint64_t kBenchTag = 0x424e4348;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string metadata_line(std::uint64_t seed, std::uint64_t source_hash) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "# strategem %s seed=%llu scenario=%016llx",
                kVersionString, static_cast<unsigned long long>(seed),
                static_cast<unsigned long long>(source_hash));
  return buf;
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot open '" + tmp.string() + "' for writing");
    }
    out << text;
    out.flush();
    if (!out) {
      throw Error("failed while writing '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, path);
}

RunArtifacts write_artifacts(const std::string& out_dir,
                             const std::string& output_name,
                             std::string csv_text, std::string summary_text) {
  fs::path csv_path =
      (out_dir.empty() ? fs::path(".") : fs::path(out_dir)) / output_name;
  if (!csv_path.parent_path().empty()) {
    fs::create_directories(csv_path.parent_path());
  }
  fs::path summary_path = csv_path;
  summary_path.replace_extension(".txt");
  write_file_atomic(csv_path, csv_text);
  write_file_atomic(summary_path, summary_text);
  return {csv_path.string(), summary_path.string(), std::move(csv_text),
          std::move(summary_text)};
}

std::string direction_name(const std::vector<std::string>& names, Edge e) {
  return names[static_cast<size_t>(e.parent)] + "->" +
         names[static_cast<size_t>(e.child)];
}

void write_transcript(std::ostringstream& csv, std::ostringstream& sum,
                      const OrientationResult& result,
                      const std::vector<std::string>& names) {
  csv << "edge,direction,oracle_outcome,certificate_point,certificate_se,"
         "n_calls\n";
  long calls = 0;
  for (const EdgeDecision& d : result.transcript) {
    ++calls;
    const double point = d.certificate ? d.certificate->point : 0.0;
    const double se = d.certificate ? d.certificate->std_error : 0.0;
    const std::string undirected =
        names[static_cast<size_t>(d.undirected.parent)] + "-" +
        names[static_cast<size_t>(d.undirected.child)];
    const std::string direction = direction_name(names, d.oriented);
    csv << undirected << "," << direction << ","
        << oracle_outcome_name(d.outcome) << "," << fmt(point) << ","
        << fmt(se) << "," << calls << "\n";
    sum << undirected << ": " << direction << " ("
        << oracle_outcome_name(d.outcome) << ", certificate " << fmt(point)
        << " +- " << fmt(se) << ")\n";
  }
  sum << "oracle calls: " << calls << "\n";
}

void run_simulate(const Scenario& s, std::ostringstream& csv,
                  std::ostringstream& sum) {
  const std::vector<std::string>& names = s.scm.dag.names();
  for (size_t i = 0; i < names.size(); ++i) {
    csv << (i ? "," : "") << names[i];
  }
  csv << "\n";
  std::vector<Draw> draws = sample(s.scm, s.mc.n_outer, s.mc.seed);
  for (const Draw& d : draws) {
    for (size_t i = 0; i < d.values.size(); ++i) {
      csv << (i ? "," : "") << fmt(d.values[i]);
    }
    csv << "\n";
  }
  sum << "columns:";
  for (const std::string& n : names) {
    sum << " " << n;
  }
  sum << "\n";
}

void run_improvement(const Scenario& s, std::ostringstream& csv,
                     std::ostringstream& sum) {
  ImprovementEstimate est =
      population_improvement(s.scm, s.label, *s.classifier, *s.cost,
                             s.features, s.actions, s.solver, s.mc);
  csv << "scenario_id,point,std_error,n,verdict\n";
  csv << s.id << "," << fmt(est.point) << "," << fmt(est.std_error) << ","
      << est.n << "," << verdict_name(est.verdict) << "\n";
  sum << "point=" << fmt(est.point) << "\n";
  sum << "std_error=" << fmt(est.std_error) << "\n";
  sum << "n=" << est.n << "\n";
  sum << "verdict=" << verdict_name(est.verdict) << "\n";
}

void run_check_assumption(const Scenario& s, std::ostringstream& csv,
                          std::ostringstream& sum) {
  const std::vector<std::string>& names = s.scm.dag.names();
  std::vector<Edge> edges = s.scm.dag.edges();
  std::sort(edges.begin(), edges.end(), [](Edge a, Edge b) {
    return std::pair(a.parent, a.child) < std::pair(b.parent, b.child);
  });
  csv << "edge,holds,lift,lift_se\n";
  for (Edge e : edges) {
    ControlGrid grid = s.grid;
    grid.mc.seed = derive_seed(
        s.mc.seed, {kCheckTag, static_cast<std::uint64_t>(e.parent),
                    static_cast<std::uint64_t>(e.child)});
    AssumptionCheck check = check_control_assumption(s.scm, e, grid);
    const double lift = check.witness ? check.witness->lift : 0.0;
    const double lift_se = check.witness ? check.witness->lift_se : 0.0;
    csv << direction_name(names, e) << "," << (check.holds ? 1 : 0) << ","
        << fmt(lift) << "," << fmt(lift_se) << "\n";
    sum << direction_name(names, e) << ": holds=" << (check.holds ? 1 : 0)
        << " lift=" << fmt(lift) << " +- " << fmt(lift_se) << "\n";
  }
}

void run_sign_recovery(const Scenario& s, std::ostringstream& csv,
                       std::ostringstream& sum) {
  const std::vector<std::string>& names = s.scm.dag.names();
  OutcomeMonotonicCost cost =
      build_outcome_monotonic_cost(s.scm, s.label, s.mc, s.sign_margin_z);
  SignRecoveryResult result = linear_sign_recovery(cost);
  csv << "feature,causal,sign,probe_plus,probe_minus\n";
  for (const FeatureSign& f : result.features) {
    csv << names[static_cast<size_t>(f.node)] << "," << (f.causal ? 1 : 0)
        << "," << f.sign << "," << fmt(f.probe_plus) << ","
        << fmt(f.probe_minus) << "\n";
    sum << names[static_cast<size_t>(f.node)]
        << ": causal=" << (f.causal ? 1 : 0) << " sign=" << f.sign << "\n";
  }
}

}  // namespace

RunArtifacts run_scenario(const Scenario& s, const std::string& out_dir) {
  std::ostringstream csv;
  std::ostringstream sum;
  const std::string meta = metadata_line(s.mc.seed, s.source_hash);
  csv << meta << "\n";
  sum << meta << "\n";
  sum << "id=" << s.id << "\n";
  sum << "kind=" << scenario_kind_name(s.kind) << "\n";

  switch (s.kind) {
    case ScenarioKind::Simulate:
      run_simulate(s, csv, sum);
      break;
    case ScenarioKind::Improvement:
      run_improvement(s, csv, sum);
      break;
    case ScenarioKind::Orient: {
      OrientationResult result =
          orient_edges(skeleton_of(s.scm.dag), s.scm, s.eps, s.grid);
      write_transcript(csv, sum, result, s.scm.dag.names());
      break;
    }
    case ScenarioKind::OrientCost: {
      OrientationResult result =
          orient_edges_via_cost(skeleton_of(s.scm.dag), s.scm, s.probe);
      write_transcript(csv, sum, result, s.scm.dag.names());
      break;
    }
    case ScenarioKind::SignRecovery:
      run_sign_recovery(s, csv, sum);
      break;
    case ScenarioKind::CheckAssumption:
      run_check_assumption(s, csv, sum);
      break;
  }
  return write_artifacts(out_dir, s.output, csv.str(), sum.str());
}

namespace {

bool same_edge_set(const CausalDag& a, const CausalDag& b) {
  auto key = [](const CausalDag& dag) {
    std::vector<std::pair<int, int>> k;
    for (Edge e : dag.edges()) {
      k.push_back({e.parent, e.child});
    }
    std::sort(k.begin(), k.end());
    return k;
  };
  return key(a) == key(b);
}

}  // namespace

RunArtifacts run_bench(const BenchConfig& cfg, const std::string& out_dir) {
  std::ostringstream csv;
  std::ostringstream sum;
  const std::string meta = metadata_line(cfg.mc.seed, cfg.source_hash);
  csv << meta << "\n";
  sum << meta << "\n";
  sum << "kind=bench\n";
  csv << "trial,n_nodes,n_edges,seed,orient_correct,cost_correct,"
         "routes_agree,oracle_calls,cost_calls\n";

  for (int t = 0; t < cfg.n_trials; ++t) {
    const std::uint64_t trial_seed =
        derive_seed(cfg.mc.seed, {kBenchTag, static_cast<std::uint64_t>(t)});
    Rng pick(trial_seed);
    RandomAnmSpec spec;
    spec.n_nodes = cfg.node_lo + static_cast<int>(pick.next_below(
                                     cfg.node_hi - cfg.node_lo + 1));
    spec.edge_probability = cfg.edge_probability;
    spec.weight_lo = cfg.weight_lo;
    spec.weight_hi = cfg.weight_hi;
    spec.seed = derive_seed(trial_seed, {1});
    Scm truth = random_anm(spec);
    Skeleton skeleton = skeleton_of(truth.dag);

    ControlGrid grid = cfg.grid;
    grid.mc.seed = derive_seed(trial_seed, {2});
    CostProbeSpec probe = cfg.probe;
    probe.mc.seed = derive_seed(trial_seed, {3});

    OrientationResult via_oracle =
        orient_edges(skeleton, truth, cfg.eps, grid);
    OrientationResult via_cost = orient_edges_via_cost(skeleton, truth, probe);

    const bool orient_ok = same_edge_set(via_oracle.oriented, truth.dag);
    const bool cost_ok = same_edge_set(via_cost.oriented, truth.dag);
    const bool agree = same_edge_set(via_oracle.oriented, via_cost.oriented);

    csv << t << "," << spec.n_nodes << "," << skeleton.edges.size() << ","
        << trial_seed << "," << (orient_ok ? 1 : 0) << "," << (cost_ok ? 1 : 0)
        << "," << (agree ? 1 : 0) << "," << via_oracle.oracle_calls << ","
        << via_cost.oracle_calls << "\n";
    sum << "trial " << t << ": orient_correct=" << (orient_ok ? 1 : 0)
        << " cost_correct=" << (cost_ok ? 1 : 0)
        << " routes_agree=" << (agree ? 1 : 0) << "\n";
  }
  return write_artifacts(out_dir, cfg.output, csv.str(), sum.str());
}

}  // namespace strategem
