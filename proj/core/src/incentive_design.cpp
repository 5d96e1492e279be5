#include "strategem/incentive_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "strategem/counterfactual.hpp"
#include "strategem/errors.hpp"
#include "strategem/parallel.hpp"
#include "strategem/rng.hpp"
#include "strategem/stats.hpp"

namespace strategem {

namespace {

constexpr std::uint64_t kMeshTag = 0x4d455348;
constexpr std::uint64_t kStageOneTag = 0x53544731;
constexpr std::uint64_t kStageTwoTag = 0x53544732;
constexpr std::uint64_t kCertificateTag = 0x43455254;
constexpr std::uint64_t kEdgeTag = 0x45444745;
constexpr std::uint64_t kSearchTag = 0x53524348;

// Nodes with a directed path to w that never passes through v; excludes both
// endpoints. Under an intervention on v these are exactly the nodes whose
// noise still reaches w.
std::vector<int> ancestors_avoiding(const CausalDag& dag, int w, int v) {
  std::vector<bool> seen(static_cast<size_t>(dag.node_count()), false);
  std::vector<int> stack;
  for (int p : dag.parents(w)) {
    if (p != v && !seen[static_cast<size_t>(p)]) {
      seen[static_cast<size_t>(p)] = true;
      stack.push_back(p);
    }
  }
  std::vector<int> out;
  while (!stack.empty()) {
    int k = stack.back();
    stack.pop_back();
    out.push_back(k);
    for (int p : dag.parents(k)) {
      if (p != v && !seen[static_cast<size_t>(p)]) {
        seen[static_cast<size_t>(p)] = true;
        stack.push_back(p);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double recover_noise(const Scm& scm, int node, const Assignment& values) {
  if (!scm.is_additive(node)) {
    throw NonAdditiveAbductionError(
        "control function: cannot recover the noise of embedded node " +
        scm.dag.name(node));
  }
  double base =
      eval_structural(scm.equations[static_cast<size_t>(node)], values, 0.0);
  return values[static_cast<size_t>(node)] - base;
}

void check_edge(const Scm& scm, Edge edge, const char* where) {
  int n = scm.node_count();
  if (edge.parent < 0 || edge.parent >= n || edge.child < 0 ||
      edge.child >= n || edge.parent == edge.child) {
    throw UnknownNodeError(std::string(where) + ": malformed edge");
  }
}

}  // namespace

std::vector<double> linspace_candidates(double bound, int n) {
  if (n < 2) {
    throw std::invalid_argument("linspace_candidates: need at least 2 points");
  }
  if (!(bound >= 0.0)) {
    throw std::invalid_argument("linspace_candidates: bound must be >= 0");
  }
  std::vector<double> out(static_cast<size_t>(n));
  double step = 2.0 * bound / static_cast<double>(n - 1);
  for (int k = 0; k < n; ++k) {
    out[static_cast<size_t>(k)] = -bound + step * static_cast<double>(k);
  }
  out.front() = -bound;
  out.back() = bound;
  return out;
}

std::vector<int> ControlFunction::cell_key(const Assignment& values) const {
  std::vector<int> key(cell_nodes.size());
  for (size_t i = 0; i < cell_nodes.size(); ++i) {
    double u = recover_noise(scm, cell_nodes[i], values);
    int c = 0;
    if (cell_hi[i] > cell_lo[i]) {
      double t = (u - cell_lo[i]) / (cell_hi[i] - cell_lo[i]);
      c = static_cast<int>(std::floor(t * static_cast<double>(cells_per_dim)));
      c = std::clamp(c, 0, cells_per_dim - 1);
    }
    key[i] = c;
  }
  return key;
}

double ControlFunction::operator()(const Assignment& values) const {
  if (table.empty()) {
    throw std::logic_error("ControlFunction: empty table");
  }
  std::vector<int> key = cell_key(values);
  auto it = table.find(key);
  if (it != table.end()) {
    return it->second;
  }
  // Nearest populated cell in index space; map order breaks ties.
  double best_d = std::numeric_limits<double>::infinity();
  double best_v = 0.0;
  for (const auto& [k, v] : table) {
    double d = 0.0;
    for (size_t i = 0; i < k.size(); ++i) {
      double diff = static_cast<double>(k[i] - key[i]);
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best_v = v;
    }
  }
  return best_v;
}

std::optional<ControlFunction> construct_control_function(
    const Scm& scm, Edge edge, const ControlGrid& grid) {
  check_edge(scm, edge, "construct_control_function");
  if (grid.mesh_size < 1 || grid.cells_per_dim < 1) {
    throw std::invalid_argument(
        "construct_control_function: mesh_size and cells_per_dim must be "
        "positive");
  }
  const int v = edge.parent;
  const int w = edge.child;

  ControlFunction cf;
  cf.scm = scm;
  cf.edge = edge;
  cf.candidates = linspace_candidates(scm.support_bound, grid.n_candidates);
  cf.cell_nodes = ancestors_avoiding(scm.dag, w, v);
  cf.cells_per_dim = grid.cells_per_dim;

  const std::vector<Draw> mesh =
      sample(scm, grid.mesh_size, derive_seed(grid.mc.seed, {kMeshTag}));
  const size_t dims = cf.cell_nodes.size();
  const size_t n_mesh = mesh.size();

  std::vector<std::vector<double>> mesh_u(n_mesh, std::vector<double>(dims));
  cf.cell_lo.assign(dims, 0.0);
  cf.cell_hi.assign(dims, 0.0);
  for (size_t m = 0; m < n_mesh; ++m) {
    for (size_t i = 0; i < dims; ++i) {
      double u = recover_noise(scm, cf.cell_nodes[i], mesh[m].values);
      mesh_u[m][i] = u;
      if (m == 0) {
        cf.cell_lo[i] = u;
        cf.cell_hi[i] = u;
      } else {
        cf.cell_lo[i] = std::min(cf.cell_lo[i], u);
        cf.cell_hi[i] = std::max(cf.cell_hi[i], u);
      }
    }
  }

  // Stage 1: estimate the interventional mean of w for every mesh point and
  // candidate. Exact when the closed form propagates.
  const int n_cand = static_cast<int>(cf.candidates.size());
  std::vector<double> est(n_mesh * static_cast<size_t>(n_cand));
  parallel_for(static_cast<long>(est.size()), grid.mc.threads, [&](long idx) {
    size_t m = static_cast<size_t>(idx) / static_cast<size_t>(n_cand);
    int c = static_cast<int>(idx % n_cand);
    ConditioningEvent event = ConditioningEvent::all_except(mesh[m].values, w);
    Intervention iv =
        Intervention::set(v, cf.candidates[static_cast<size_t>(c)]);
    if (grid.mc.allow_analytic) {
      if (auto exact = analytic_expected_counterfactual(scm, event, iv, w)) {
        est[static_cast<size_t>(idx)] = *exact;
        return;
      }
    }
    McSpec spec;
    spec.n = grid.mc.n_inner;
    spec.seed = derive_seed(
        grid.mc.seed,
        {kStageOneTag, static_cast<std::uint64_t>(m),
         static_cast<std::uint64_t>(c)});
    est[static_cast<size_t>(idx)] =
        expected_counterfactual(scm, event, iv, w, spec).mean;
  });

  // If no candidate moves any mesh estimate at all, v cannot reach w and
  // there is nothing to control. With exact estimates this rejection is
  // exact, which is what keeps reversed edges from slipping through.
  bool all_flat = true;
  for (size_t m = 0; m < n_mesh && all_flat; ++m) {
    const double* row = est.data() + m * static_cast<size_t>(n_cand);
    for (int c = 1; c < n_cand; ++c) {
      if (row[c] != row[0]) {
        all_flat = false;
        break;
      }
    }
  }
  if (all_flat) {
    return std::nullopt;
  }

  // Per-point winner; ties go to the first candidate for determinism.
  std::vector<int> winner(n_mesh, 0);
  for (size_t m = 0; m < n_mesh; ++m) {
    const double* row = est.data() + m * static_cast<size_t>(n_cand);
    int best = 0;
    for (int c = 1; c < n_cand; ++c) {
      if (row[c] > row[best]) {
        best = c;
      }
    }
    winner[m] = best;
  }

  // The first mesh point landing in a cell defines that cell's policy.
  for (size_t m = 0; m < n_mesh; ++m) {
    std::vector<int> key(dims);
    for (size_t i = 0; i < dims; ++i) {
      int c = 0;
      if (cf.cell_hi[i] > cf.cell_lo[i]) {
        double t =
            (mesh_u[m][i] - cf.cell_lo[i]) / (cf.cell_hi[i] - cf.cell_lo[i]);
        c = static_cast<int>(
            std::floor(t * static_cast<double>(cf.cells_per_dim)));
        c = std::clamp(c, 0, cf.cells_per_dim - 1);
      }
      key[i] = c;
    }
    cf.table.emplace(std::move(key),
                     cf.candidates[static_cast<size_t>(winner[m])]);
  }

  // Stage 2: re-estimate each winner on a fresh stream so the selection in
  // stage 1 cannot bias the lift statistic upward, and pair it against
  // pinning v at its own observed value under the same profile. The pairing
  // cancels everything that does not flow through v, so the diff is exactly
  // zero when v cannot reach w and its dispersion scales with the effect
  // itself when it can.
  std::vector<double> lifts(n_mesh);
  parallel_for(static_cast<long>(n_mesh), grid.mc.threads, [&](long ml) {
    size_t m = static_cast<size_t>(ml);
    int c = winner[m];
    ConditioningEvent event = ConditioningEvent::all_except(mesh[m].values, w);
    Intervention chosen =
        Intervention::set(v, cf.candidates[static_cast<size_t>(c)]);
    Intervention stay =
        Intervention::set(v, mesh[m].values[static_cast<size_t>(v)]);
    double at_chosen = 0.0;
    double at_stay = 0.0;
    bool have_chosen = false;
    bool have_stay = false;
    if (grid.mc.allow_analytic) {
      if (auto exact = analytic_expected_counterfactual(scm, event, chosen, w)) {
        at_chosen = *exact;
        have_chosen = true;
      }
      if (auto exact = analytic_expected_counterfactual(scm, event, stay, w)) {
        at_stay = *exact;
        have_stay = true;
      }
    }
    if (!have_chosen) {
      McSpec spec;
      spec.n = grid.mc.n_inner;
      spec.seed = derive_seed(
          grid.mc.seed, {kStageTwoTag, static_cast<std::uint64_t>(m), 0});
      at_chosen = expected_counterfactual(scm, event, chosen, w, spec).mean;
    }
    if (!have_stay) {
      McSpec spec;
      spec.n = grid.mc.n_inner;
      spec.seed = derive_seed(
          grid.mc.seed, {kStageTwoTag, static_cast<std::uint64_t>(m), 1});
      at_stay = expected_counterfactual(scm, event, stay, w, spec).mean;
    }
    lifts[m] = at_chosen - at_stay;
  });

  MeanSe lift_ms = mean_and_se(lifts);
  cf.lift = lift_ms.mean;
  cf.lift_se = lift_ms.std_error;
  if (!(cf.lift > grid.margin_z * cf.lift_se)) {
    return std::nullopt;
  }
  return cf;
}

AssumptionCheck check_control_assumption(const Scm& scm, Edge edge,
                                         const ControlGrid& grid) {
  AssumptionCheck out;
  out.witness = construct_control_function(scm, edge, grid);
  out.holds = out.witness.has_value();
  return out;
}

AugmentedInstance build_augmented_instance(const Scm& scm, Edge edge,
                                           double eps) {
  check_edge(scm, edge, "build_augmented_instance");
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument(
        "build_augmented_instance: eps must lie in (0, 1)");
  }
  if (!scm.dag.has_edge(edge.parent, edge.child) &&
      !scm.dag.has_edge(edge.child, edge.parent)) {
    throw std::invalid_argument(
        "build_augmented_instance: edge is not in the model's skeleton");
  }
  const int i = edge.parent;
  const int j = edge.child;
  const int copy_node = scm.node_count();

  std::vector<std::string> names = scm.dag.names();
  std::string copy_name = names[static_cast<size_t>(i)] + "_copy";
  while (std::find(names.begin(), names.end(), copy_name) != names.end()) {
    copy_name += "_";
  }
  names.push_back(copy_name);

  std::vector<Edge> edges = scm.dag.edges();
  edges.push_back({i, copy_node});

  Scm aug;
  aug.dag = CausalDag(std::move(names), std::move(edges));
  aug.equations = scm.equations;
  aug.equations.push_back(LinearFn{0.0, {{i, 1.0}}});
  aug.noises = scm.noises;
  aug.noises.push_back(NoiseSpec::point_mass(0.0));
  aug.composition = scm.composition;
  aug.composition.push_back(NoiseComposition::Additive);
  aug.support_bound = scm.support_bound;

  AugmentedInstance out;
  out.base_edge = edge;
  out.copy_node = copy_node;
  out.inst.scm = std::move(aug);
  out.inst.label = j;
  out.inst.eps = eps;
  out.inst.features = FeatureSpace::all_except(out.inst.scm, j);
  out.copy_pos = out.inst.features.pos_of(copy_node);
  out.moved_pos = out.inst.features.pos_of(i);
  out.inst.cost = std::make_shared<GatedCoordinateCost>(
      out.inst.features.dim(), out.moved_pos, 2.0 * scm.support_bound);
  out.inst.actions = ActionSet::full_space(out.inst.features.dim());
  return out;
}

const char* oracle_outcome_name(OracleOutcome o) {
  switch (o) {
    case OracleOutcome::Classifier:
      return "Classifier";
    case OracleOutcome::Fail:
      return "Fail";
  }
  throw std::logic_error("oracle_outcome_name: unknown outcome");
}

OracleAnswer good_incentives_oracle(const AugmentedInstance& aug,
                                    const ControlGrid& grid) {
  const GoodIncentivesInstance& inst = aug.inst;
  if (!inst.cost || inst.cost->kind() != CostKind::GatedCoordinate) {
    throw std::invalid_argument(
        "good_incentives_oracle: constructive strategy needs a "
        "gated-coordinate cost");
  }
  OracleAnswer ans;
  Edge probe{aug.base_edge.parent, inst.label};
  std::optional<ControlFunction> cf =
      construct_control_function(inst.scm, probe, grid);
  if (!cf) {
    return ans;
  }

  double spacing = cf->candidates.size() > 1
                       ? cf->candidates[1] - cf->candidates[0]
                       : 1.0;
  auto policy = std::make_shared<const ControlFunction>(std::move(*cf));

  // The reference profile substitutes the copy slot for the movable slot, so
  // adapting x_i cannot move the target the classifier compares against.
  const FeatureSpace features = inst.features;
  const int node_count = inst.scm.node_count();
  const int moved_node = aug.base_edge.parent;
  const int copy_pos = aug.copy_pos;
  IndicatorMatchClassifier::ReferenceFn ref =
      [policy, features, node_count, moved_node,
       copy_pos](std::span<const double> x) {
        Assignment full(static_cast<size_t>(node_count), 0.0);
        for (size_t k = 0; k < features.nodes.size(); ++k) {
          full[static_cast<size_t>(features.nodes[k])] = x[k];
        }
        full[static_cast<size_t>(moved_node)] =
            x[static_cast<size_t>(copy_pos)];
        return (*policy)(full);
      };
  auto f = std::make_shared<IndicatorMatchClassifier>(
      features.dim(), aug.moved_pos, std::move(ref), spacing / 2.0, 1.0);

  McConfig mc = grid.mc;
  mc.seed = derive_seed(grid.mc.seed, {kCertificateTag});
  ImprovementEstimate cert =
      population_improvement(inst.scm, inst.label, *f, *inst.cost, features,
                             inst.actions, ClosedFormSolver{}, mc);
  if (cert.verdict != Verdict::Improvement) {
    // The policy exists but its certificate is not significantly positive;
    // report Fail rather than an uncertified classifier.
    ans.certificate = cert;
    return ans;
  }
  ans.outcome = OracleOutcome::Classifier;
  ans.classifier = std::move(f);
  ans.certificate = cert;
  ans.control = *policy;
  return ans;
}

OracleAnswer good_incentives_oracle(const GoodIncentivesInstance& inst,
                                    const SearchStrategy& strategy) {
  if (!inst.cost) {
    throw std::invalid_argument("good_incentives_oracle: instance has no cost");
  }
  if (strategy.weight_values.empty()) {
    throw std::invalid_argument(
        "good_incentives_oracle: empty weight grid for the search family");
  }
  const int d = inst.features.dim();
  if (d <= 0) {
    throw std::invalid_argument(
        "good_incentives_oracle: instance has no features");
  }

  std::vector<size_t> idx(static_cast<size_t>(d), 0);
  long used = 0;
  std::uint64_t combo = 0;
  while (true) {
    std::vector<std::pair<int, double>> weights;
    for (int k = 0; k < d; ++k) {
      double wv = strategy.weight_values[idx[static_cast<size_t>(k)]];
      if (wv != 0.0) {
        weights.push_back({k, wv});
      }
    }
    if (!weights.empty()) {
      if (used == strategy.budget) {
        throw BudgetExhaustedError(
            "good_incentives_oracle: certificate budget exhausted before the "
            "family was searched");
      }
      ++used;
      auto f = std::make_shared<LinearScoreClassifier>(
          d, std::move(weights), strategy.offset, inst.scm.support_bound);
      McConfig mc = strategy.mc;
      mc.seed = derive_seed(strategy.mc.seed, {kSearchTag, combo});
      ImprovementEstimate cert =
          population_improvement(inst.scm, inst.label, *f, *inst.cost,
                                 inst.features, inst.actions, strategy.solver,
                                 mc);
      if (cert.verdict == Verdict::Improvement) {
        OracleAnswer ans;
        ans.outcome = OracleOutcome::Classifier;
        ans.classifier = std::move(f);
        ans.certificate = cert;
        return ans;
      }
    }
    ++combo;
    size_t k = 0;
    while (k < idx.size() && ++idx[k] == strategy.weight_values.size()) {
      idx[k] = 0;
      ++k;
    }
    if (k == idx.size()) {
      break;
    }
  }
  return OracleAnswer{};
}

OrientationResult orient_edges(const Skeleton& skeleton, const Scm& scm_truth,
                               double eps, const ControlGrid& grid) {
  Skeleton truth = skeleton_of(scm_truth.dag);
  if (skeleton.names != truth.names || skeleton.edges != truth.edges) {
    throw std::invalid_argument(
        "orient_edges: skeleton does not match the ground-truth model");
  }

  std::vector<std::pair<int, int>> order = skeleton.edges;
  std::sort(order.begin(), order.end());

  OrientationResult out;
  std::vector<Edge> oriented_edges;
  for (const auto& [i, j] : order) {
    ControlGrid edge_grid = grid;
    edge_grid.mc.seed =
        derive_seed(grid.mc.seed, {kEdgeTag, static_cast<std::uint64_t>(i),
                                   static_cast<std::uint64_t>(j)});
    AugmentedInstance aug =
        build_augmented_instance(scm_truth, Edge{i, j}, eps);
    OracleAnswer ans = good_incentives_oracle(aug, edge_grid);
    out.oracle_calls += 1;

    EdgeDecision decision;
    decision.undirected = Edge{i, j};
    decision.outcome = ans.outcome;
    decision.certificate = ans.certificate;
    if (ans.outcome == OracleOutcome::Classifier) {
      if (!ans.certificate ||
          ans.certificate->verdict != Verdict::Improvement) {
        throw AssumptionViolatedError(
            "orient_edges: oracle oriented " + scm_truth.dag.name(i) +
            " -> " + scm_truth.dag.name(j) +
            " without a significant certificate");
      }
      decision.oriented = Edge{i, j};
    } else {
      decision.oriented = Edge{j, i};
    }
    oriented_edges.push_back(decision.oriented);
    out.transcript.push_back(std::move(decision));
  }
  out.oriented = CausalDag(skeleton.names, std::move(oriented_edges));
  return out;
}

}  // namespace strategem
