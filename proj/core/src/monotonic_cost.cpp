#include "strategem/monotonic_cost.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
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

constexpr std::uint64_t kDeltaOneTag = 0x444c5431;
constexpr std::uint64_t kDeltaTwoTag = 0x444c5432;
constexpr std::uint64_t kCostEdgeTag = 0x43454447;
constexpr std::uint64_t kProbeMeshTag = 0x50524d48;
constexpr double kCellResolution = 1e-6;

long long round_cell(double v) {
  return static_cast<long long>(std::llround(v / kCellResolution));
}

std::uint64_t fnv1a(const std::vector<long long>& key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (long long cell : key) {
    std::uint64_t word = static_cast<std::uint64_t>(cell);
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xffULL;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::vector<long long> probe_key(std::span<const double> x,
                                 std::span<const double> a) {
  std::vector<long long> key;
  key.reserve(x.size() + a.size());
  for (double v : x) {
    key.push_back(round_cell(v));
  }
  for (double v : a) {
    key.push_back(round_cell(v));
  }
  return key;
}

struct Term {
  double mean = 0.0;
  double se = 0.0;
};

Term conditional_mean(const Scm& scm, const ConditioningEvent& event,
                      const Intervention& iv, int label, const McConfig& mc,
                      std::uint64_t seed) {
  if (mc.allow_analytic) {
    if (auto exact = analytic_expected_counterfactual(scm, event, iv, label)) {
      return {*exact, 0.0};
    }
  }
  McSpec spec;
  spec.n = mc.n_inner;
  spec.seed = seed;
  McEstimate est = expected_counterfactual(scm, event, iv, label, spec);
  return {est.mean, est.std_error};
}

double upper_tail(double z) {
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

}  // namespace

OutcomeDelta outcome_delta(const Scm& scm, int label,
                           const FeatureSpace& features,
                           std::span<const double> x,
                           std::span<const double> a, const McConfig& mc) {
  if (x.size() != a.size() ||
      static_cast<int>(x.size()) != features.dim()) {
    throw DimensionMismatchError(
        "outcome_delta: features and action must match the feature space");
  }
  if (features.pos_of(label) >= 0) {
    throw std::invalid_argument("outcome_delta: label cannot be a feature");
  }
  OutcomeDelta out;
  out.x.assign(x.begin(), x.end());
  out.a.assign(a.begin(), a.end());

  Intervention iv;
  std::vector<int> moved;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] != 0.0) {
      int node = features.node_at(static_cast<int>(i));
      iv.and_set(node, x[i] + a[i]);
      moved.push_back(node);
    }
  }
  if (moved.empty()) {
    return out;  // null action moves nothing, exactly
  }
  // If the label is not downstream of any moved coordinate the intervention
  // cannot reach it; the delta is structurally zero.
  std::vector<int> reachable = scm.dag.descendants_of(moved);
  if (!std::binary_search(reachable.begin(), reachable.end(), label)) {
    return out;
  }

  ConditioningEvent event = ConditioningEvent::of(features.nodes, x);
  std::uint64_t probe_hash = fnv1a(probe_key(x, a));
  Term t1 = conditional_mean(scm, event, iv, label, mc,
                             derive_seed(mc.seed, {kDeltaOneTag, probe_hash}));
  Term t2 =
      conditional_mean(scm, event, Intervention::none(), label, mc,
                       derive_seed(mc.seed, {kDeltaTwoTag, probe_hash}));
  out.delta = t1.mean - t2.mean;
  out.std_error = std::sqrt(t1.se * t1.se + t2.se * t2.se);
  return out;
}

OutcomeMonotonicCost::OutcomeMonotonicCost(std::shared_ptr<const Scm> scm,
                                           int label, FeatureSpace features,
                                           McConfig mc, double margin_z)
    : scm_(std::move(scm)),
      label_(label),
      features_(std::move(features)),
      mc_(mc),
      margin_z_(margin_z),
      dim_(features_.dim()) {
  if (!scm_) {
    throw std::invalid_argument("OutcomeMonotonicCost: null model");
  }
  if (label_ < 0 || label_ >= scm_->node_count()) {
    throw UnknownNodeError("OutcomeMonotonicCost: label node out of range");
  }
  if (features_.pos_of(label_) >= 0) {
    throw std::invalid_argument(
        "OutcomeMonotonicCost: label cannot be a feature");
  }
  if (margin_z_ < 0.0) {
    throw std::invalid_argument("OutcomeMonotonicCost: margin_z must be >= 0");
  }
}

OutcomeDelta OutcomeMonotonicCost::delta(std::span<const double> x,
                                         std::span<const double> action) const {
  return outcome_delta(*scm_, label_, features_, x, action, mc_);
}

double OutcomeMonotonicCost::operator()(std::span<const double> action,
                                        std::span<const double> x) const {
  if (static_cast<int>(action.size()) != dim_ ||
      static_cast<int>(x.size()) != dim_) {
    throw DimensionMismatchError(
        "OutcomeMonotonicCost: action and features must have the cost's "
        "dimension");
  }
  evals_.fetch_add(1, std::memory_order_relaxed);
  std::vector<long long> key = probe_key(x, action);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      return it->second;
    }
  }
  OutcomeDelta d = delta(x, action);
  double value = d.delta > margin_z_ * d.std_error ? d.delta : 0.0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    cache_.emplace(std::move(key), value);
  }
  return value;
}

OutcomeMonotonicCost build_outcome_monotonic_cost(const Scm& scm, int label,
                                                  const McConfig& mc,
                                                  double margin_z) {
  return OutcomeMonotonicCost(std::make_shared<const Scm>(scm), label,
                              FeatureSpace::all_except(scm, label), mc,
                              margin_z);
}

OrientationResult orient_edges_via_cost(const Skeleton& skeleton,
                                        const Scm& scm_truth,
                                        const CostProbeSpec& probe) {
  Skeleton truth = skeleton_of(scm_truth.dag);
  if (skeleton.names != truth.names || skeleton.edges != truth.edges) {
    throw std::invalid_argument(
        "orient_edges_via_cost: skeleton does not match the ground-truth "
        "model");
  }
  if (probe.n_x < 1 || probe.n_alpha < 2) {
    throw std::invalid_argument(
        "orient_edges_via_cost: need at least one profile and two alphas");
  }

  const long n_probes = static_cast<long>(probe.n_x) * probe.n_alpha;
  // Bonferroni: the per-probe significance level is the margin's tail mass
  // split across all probes, so the whole probe set false-positives about as
  // often as one probe would at margin_z.
  double corrected_z =
      one_sided_z(upper_tail(probe.margin_z) / static_cast<double>(n_probes));

  std::vector<std::pair<int, int>> order = skeleton.edges;
  std::sort(order.begin(), order.end());

  OrientationResult out;
  std::vector<Edge> oriented_edges;
  for (const auto& [i, j] : order) {
    McConfig mc = probe.mc;
    mc.seed = derive_seed(probe.mc.seed,
                          {kCostEdgeTag, static_cast<std::uint64_t>(i),
                           static_cast<std::uint64_t>(j)});
    FeatureSpace features = FeatureSpace::all_except(scm_truth, j);
    int axis = features.pos_of(i);
    OutcomeMonotonicCost cost(std::make_shared<const Scm>(scm_truth), j,
                              features, mc, corrected_z);
    out.oracle_calls += 1;

    const std::vector<Draw> mesh = sample(
        scm_truth, probe.n_x, derive_seed(mc.seed, {kProbeMeshTag}));
    const std::vector<double> alphas =
        linspace_candidates(scm_truth.support_bound, probe.n_alpha);

    std::vector<double> costs(static_cast<size_t>(n_probes));
    parallel_for(n_probes, probe.mc.threads, [&](long idx) {
      size_t m = static_cast<size_t>(idx) / alphas.size();
      size_t c = static_cast<size_t>(idx) % alphas.size();
      std::vector<double> x = features.project(mesh[m].values);
      std::vector<double> a(static_cast<size_t>(features.dim()), 0.0);
      a[static_cast<size_t>(axis)] = alphas[c];
      costs[static_cast<size_t>(idx)] = cost(a, x);
    });

    double best = 0.0;
    for (double c : costs) {
      best = std::max(best, c);
    }
    bool positive = best > 0.0;

    EdgeDecision decision;
    decision.undirected = Edge{i, j};
    decision.outcome =
        positive ? OracleOutcome::Classifier : OracleOutcome::Fail;
    ImprovementEstimate cert;
    cert.point = best;
    cert.std_error = 0.0;
    cert.n = n_probes;
    cert.alpha = upper_tail(corrected_z);
    cert.verdict = positive ? Verdict::Improvement : Verdict::Gaming;
    decision.certificate = cert;
    if (positive) {
      std::vector<int> reach = scm_truth.dag.descendants_of(
          std::vector<int>{i});
      if (!std::binary_search(reach.begin(), reach.end(), j)) {
        throw AssumptionViolatedError(
            "orient_edges_via_cost: positive cost on " +
            scm_truth.dag.name(i) + " -> " + scm_truth.dag.name(j) +
            " although the label is not downstream");
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

SignRecoveryResult linear_sign_recovery(const OutcomeMonotonicCost& cost) {
  const int d = cost.dim();
  if (d <= 0) {
    throw std::invalid_argument("linear_sign_recovery: cost has no features");
  }
  SignRecoveryResult out;
  long before = cost.evaluations();
  std::vector<double> origin(static_cast<size_t>(d), 0.0);
  for (int i = 0; i < d; ++i) {
    std::vector<double> a(static_cast<size_t>(d), 0.0);
    a[static_cast<size_t>(i)] = 1.0;
    double plus = cost(a, origin);
    a[static_cast<size_t>(i)] = -1.0;
    double minus = cost(a, origin);

    FeatureSign fs;
    fs.pos = i;
    fs.node = cost.features().node_at(i);
    fs.probe_plus = plus;
    fs.probe_minus = minus;
    if (plus > 0.0 && minus > 0.0) {
      throw AmbiguousSignError(
          "linear_sign_recovery: both probe directions raise the label for "
          "feature " +
          cost.scm().dag.name(fs.node));
    }
    if (plus > 0.0) {
      fs.causal = true;
      fs.sign = 1;
    } else if (minus > 0.0) {
      fs.causal = true;
      fs.sign = -1;
    }
    out.features.push_back(fs);
  }
  out.query_count = cost.evaluations() - before;
  return out;
}

}  // namespace strategem
