#include "strategem/improvement.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "strategem/counterfactual.hpp"
#include "strategem/errors.hpp"
#include "strategem/parallel.hpp"
#include "strategem/rng.hpp"
#include "strategem/stats.hpp"

namespace strategem {

namespace {

constexpr std::uint64_t kTermOneTag = 0x54524d31;
constexpr std::uint64_t kTermTwoTag = 0x54524d32;
constexpr std::uint64_t kPopulationTag = 0x504f5055;
constexpr std::uint64_t kPotentialTag = 0x504f5457;

struct Term {
  double mean = 0.0;
  double se = 0.0;
  long n = 0;
};

// Conditional label mean under an intervention, exact when a closed form
// propagates, otherwise Monte Carlo on the given stream.
Term conditional_mean(const Scm& scm, const ConditioningEvent& event,
                      const Intervention& iv, int label, const McConfig& mc,
                      std::uint64_t seed) {
  if (mc.allow_analytic) {
    if (auto exact = analytic_expected_counterfactual(scm, event, iv, label)) {
      return {*exact, 0.0, 0};
    }
  }
  McSpec spec;
  spec.n = mc.n_inner;
  spec.seed = seed;
  McEstimate est = expected_counterfactual(scm, event, iv, label, spec);
  return {est.mean, est.std_error, est.n};
}

// Coordinates the best response actually moves become interventions at the
// adapted values.
Intervention moved_intervention(const BestResponse& br,
                                const FeatureSpace& features) {
  Intervention iv;
  for (int i = 0; i < static_cast<int>(br.action.size()); ++i) {
    if (br.action[static_cast<size_t>(i)] != 0.0) {
      iv.and_set(features.node_at(i), br.adapted[static_cast<size_t>(i)]);
    }
  }
  return iv;
}

ImprovementEstimate finish(double point, double se, long n, double alpha) {
  ImprovementEstimate est;
  est.point = point;
  est.std_error = se;
  est.n = n;
  est.alpha = alpha;
  est.verdict = decide_verdict(point, se, alpha);
  return est;
}

void check_feature_setup(const Scm& scm, int label,
                         const FeatureSpace& features, const char* where) {
  if (label < 0 || label >= scm.node_count()) {
    throw UnknownNodeError(std::string(where) + ": label node out of range");
  }
  if (features.pos_of(label) >= 0) {
    throw std::invalid_argument(std::string(where) +
                                ": label node cannot be a feature");
  }
  for (int node : features.nodes) {
    if (node < 0 || node >= scm.node_count()) {
      throw UnknownNodeError(std::string(where) +
                             ": feature node out of range");
    }
  }
}

}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Improvement:
      return "Improvement";
    case Verdict::Gaming:
      return "Gaming";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  throw std::logic_error("verdict_name: unknown verdict");
}

Verdict decide_verdict(double point, double std_error, double alpha) {
  if (!(std_error >= 0.0)) {
    throw std::invalid_argument("decide_verdict: standard error must be >= 0");
  }
  if (std_error == 0.0) {
    return point > 0.0 ? Verdict::Improvement : Verdict::Gaming;
  }
  double z = one_sided_z(alpha);
  if (point - z * std_error > 0.0) {
    return Verdict::Improvement;
  }
  if (point + z * std_error <= 0.0) {
    return Verdict::Gaming;
  }
  return Verdict::Inconclusive;
}

ImprovementEstimate individual_improvement(
    const Scm& scm, int label, const Classifier& f, const Cost& cost,
    std::span<const double> x, const FeatureSpace& features,
    const ActionSet& actions, const Solver& solver, const McConfig& mc) {
  check_feature_setup(scm, label, features, "individual_improvement");
  if (static_cast<int>(x.size()) != features.dim()) {
    throw DimensionMismatchError(
        "individual_improvement: feature vector size does not match the "
        "feature space");
  }
  BestResponse br = best_response(f, cost, x, actions, solver);
  Intervention iv = moved_intervention(br, features);
  if (iv.empty()) {
    // Null adaptation: both terms coincide, so the difference is exactly 0.
    return finish(0.0, 0.0, 0, mc.alpha);
  }
  ConditioningEvent event = ConditioningEvent::of(features.nodes, x);
  Term t1 = conditional_mean(scm, event, iv, label, mc,
                             derive_seed(mc.seed, {kTermOneTag}));
  Term t2 = conditional_mean(scm, event, Intervention::none(), label, mc,
                             derive_seed(mc.seed, {kTermTwoTag}));
  double se = std::sqrt(t1.se * t1.se + t2.se * t2.se);
  return finish(t1.mean - t2.mean, se, t1.n + t2.n, mc.alpha);
}

ImprovementEstimate population_improvement(const Scm& scm, int label,
                                           const Classifier& f,
                                           const Cost& cost,
                                           const FeatureSpace& features,
                                           const ActionSet& actions,
                                           const Solver& solver,
                                           const McConfig& mc) {
  check_feature_setup(scm, label, features, "population_improvement");
  if (mc.n_outer <= 0) {
    throw std::invalid_argument("population_improvement: n_outer must be > 0");
  }
  const std::vector<Draw> draws =
      sample(scm, mc.n_outer, derive_seed(mc.seed, {kPopulationTag, 0}));
  std::vector<double> diffs(static_cast<size_t>(mc.n_outer));
  parallel_for(mc.n_outer, mc.threads, [&](long k) {
    const Draw& d = draws[static_cast<size_t>(k)];
    std::vector<double> x = features.project(d.values);
    BestResponse br = best_response(f, cost, x, actions, solver);
    Intervention iv = moved_intervention(br, features);
    if (iv.empty()) {
      diffs[static_cast<size_t>(k)] = 0.0;
      return;
    }
    ConditioningEvent event = ConditioningEvent::of(features.nodes, x);
    std::uint64_t uk = static_cast<std::uint64_t>(k);
    Term t1 = conditional_mean(scm, event, iv, label, mc,
                               derive_seed(mc.seed, {kPopulationTag, 1, uk}));
    Term t2 = conditional_mean(scm, event, Intervention::none(), label, mc,
                               derive_seed(mc.seed, {kPopulationTag, 2, uk}));
    diffs[static_cast<size_t>(k)] = t1.mean - t2.mean;
  });
  MeanSe ms = mean_and_se(diffs);
  return finish(ms.mean, ms.std_error, ms.n, mc.alpha);
}

ImprovementEstimate potential_outcome_improvement(
    const Scm& scm, int label, const Classifier& f, const Cost& cost,
    const FeatureSpace& features, const ActionSet& actions,
    const Solver& solver, const McConfig& mc) {
  check_feature_setup(scm, label, features, "potential_outcome_improvement");
  if (mc.n_outer <= 0) {
    throw std::invalid_argument(
        "potential_outcome_improvement: n_outer must be > 0");
  }
  const std::vector<Draw> draws =
      sample(scm, mc.n_outer, derive_seed(mc.seed, {kPotentialTag, 0}));
  std::vector<double> diffs(static_cast<size_t>(mc.n_outer));
  parallel_for(mc.n_outer, mc.threads, [&](long k) {
    const Draw& d = draws[static_cast<size_t>(k)];
    std::vector<double> x = features.project(d.values);
    BestResponse br = best_response(f, cost, x, actions, solver);
    Intervention iv = moved_intervention(br, features);
    if (iv.empty()) {
      diffs[static_cast<size_t>(k)] = 0.0;
      return;
    }
    double y_cf = counterfactual_value(scm, d.values, iv, label);
    diffs[static_cast<size_t>(k)] = y_cf - d.values[static_cast<size_t>(label)];
  });
  MeanSe ms = mean_and_se(diffs);
  return finish(ms.mean, ms.std_error, ms.n, mc.alpha);
}

}  // namespace strategem
