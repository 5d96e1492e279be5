#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "strategem/agent.hpp"
#include "strategem/improvement.hpp"
#include "strategem/incentive_design.hpp"
#include "strategem/scm.hpp"

namespace strategem {

// Causal effect of taking action a at features x: the interventional label
// mean minus the conditional label mean, both given the observed features.
struct OutcomeDelta {
  std::vector<double> x;
  std::vector<double> a;
  double delta = 0.0;
  double std_error = 0.0;
};

OutcomeDelta outcome_delta(const Scm& scm, int label,
                           const FeatureSpace& features,
                           std::span<const double> x,
                           std::span<const double> a, const McConfig& mc);

// Outcome-monotonic cost realized as c(a; x) = max(delta(x, a), 0), with
// deltas that are not significantly positive (margin_z standard errors)
// clamped to zero. Evaluations are cached on (x, a) cells rounded at 1e-6 so
// repeated probes are deterministic and cheap; an atomic counter tracks how
// often the oracle is consulted.
class OutcomeMonotonicCost : public Cost {
 public:
  OutcomeMonotonicCost(std::shared_ptr<const Scm> scm, int label,
                       FeatureSpace features, McConfig mc,
                       double margin_z = 3.0);

  double operator()(std::span<const double> action,
                    std::span<const double> x) const override;
  CostKind kind() const override { return CostKind::Custom; }
  int dim() const override { return dim_; }

  // Uncached effect estimate behind the cost value.
  OutcomeDelta delta(std::span<const double> x,
                     std::span<const double> action) const;

  long evaluations() const { return evals_.load(); }
  const Scm& scm() const { return *scm_; }
  int label() const { return label_; }
  const FeatureSpace& features() const { return features_; }
  double margin_z() const { return margin_z_; }

 private:
  std::shared_ptr<const Scm> scm_;
  int label_;
  FeatureSpace features_;
  McConfig mc_;
  double margin_z_;
  int dim_;
  mutable std::mutex mu_;
  mutable std::map<std::vector<long long>, double> cache_;
  mutable std::atomic<long> evals_{0};
};

OutcomeMonotonicCost build_outcome_monotonic_cost(const Scm& scm, int label,
                                                  const McConfig& mc,
                                                  double margin_z = 3.0);

// Probe plan for deciding whether a restricted cost is identically zero:
// n_x sampled feature profiles crossed with n_alpha action magnitudes spread
// over [-B, B]. The per-probe significance margin is Bonferroni-corrected
// for the number of probes.
struct CostProbeSpec {
  int n_x = 9;
  int n_alpha = 17;
  double margin_z = 3.0;
  McConfig mc;
};

// Orients every skeleton edge by probing the outcome-monotonic cost of the
// restricted instance (label x_j, actions along x_i's axis): a positive cost
// anywhere keeps min -> max, an identically zero cost flips it. One cost
// construction per edge.
OrientationResult orient_edges_via_cost(const Skeleton& skeleton,
                                        const Scm& scm_truth,
                                        const CostProbeSpec& probe);

struct FeatureSign {
  int pos = -1;   // slot in the feature space
  int node = -1;  // model node id
  bool causal = false;
  int sign = 0;  // +1, -1, or 0 when not causal
  double probe_plus = 0.0;
  double probe_minus = 0.0;
};

struct SignRecoveryResult {
  std::vector<FeatureSign> features;
  long query_count = 0;
};

// Linear-model sign recovery at the origin: probes c(e_i; 0) and c(-e_i; 0)
// for every feature slot, exactly two cost evaluations per feature. A
// positive probe in one direction marks the feature causal with that sign;
// both directions positive is inconsistent with a linear label and raises
// AmbiguousSignError.
SignRecoveryResult linear_sign_recovery(const OutcomeMonotonicCost& cost);

}  // namespace strategem
