#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "strategem/scm.hpp"

namespace strategem {

// A (possibly empty) set of nodes forced to fixed values.
struct Intervention {
  std::vector<std::pair<int, double>> targets;  // sorted by node index

  static Intervention none() { return {}; }
  static Intervention set(int node, double value);
  Intervention& and_set(int node, double value);
  std::optional<double> value_for(int node) const;
  bool empty() const { return targets.empty(); }
};

// Partial observation of the endogenous nodes.
struct ConditioningEvent {
  std::vector<std::pair<int, double>> observed;  // sorted by node index

  // Parallel arrays: values[i] is the observation of nodes[i].
  static ConditioningEvent of(std::span<const int> nodes,
                              std::span<const double> values);
  static ConditioningEvent all(const Assignment& values);
  static ConditioningEvent all_except(const Assignment& values, int skip);
  std::optional<double> value_for(int node) const;
};

struct AbductionResult {
  // Noise values pinned exactly by the event (additive nodes whose own value
  // and all parent values are observed).
  std::vector<std::pair<int, double>> recovered;  // sorted by node index
  // Every other node; their noise is not determined by the event.
  std::vector<int> free_nodes;

  std::optional<double> recovered_for(int node) const;
};

// Equation surgery: targeted nodes become constants, their in-edges are
// removed and their noise becomes an irrelevant point mass. The result is a
// standalone model.
Scm intervene(const Scm& scm, const Intervention& iv);

// Exact abduction on additive nodes. When `query_node` is given, an observed
// embedded node only raises NonAdditiveAbductionError if its noise could
// matter for the query (it is the query node or one of its ancestors);
// otherwise the node is reported as free. Observed values that contradict a
// PointMass noise raise InconsistentEventError.
AbductionResult abduce(const Scm& scm, const ConditioningEvent& event,
                       std::optional<int> query_node = std::nullopt);

// Deterministic counterfactual: abduct from the full observation, apply the
// intervention, re-evaluate. Only nodes on directed paths from intervention
// targets to `target` are recomputed; everything else keeps its observed
// value, so a null intervention returns observed[target] bit-exactly and
// interventions on non-ancestors cannot move the target even numerically.
double counterfactual_value(const Scm& scm, const Assignment& observed,
                            const Intervention& iv, int target);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n = 0;
};

struct McSpec {
  long n = 200;
  std::uint64_t seed = 0;
};

// Monte Carlo counterfactual mean under partial observation: noises pinned
// by abduction stay fixed, every other noise the target depends on is drawn
// fresh from its prior. Raises UnsupportedConditioningError when the target
// depends on the noise of an observed-but-unrecoverable node (the event
// constrains that noise, so its prior would be the wrong law).
McEstimate expected_counterfactual(const Scm& scm,
                                   const ConditioningEvent& event,
                                   const Intervention& iv, int target,
                                   const McSpec& mc);

// Exact value of the same quantity when it is analytic: every node the
// target depends on is pinned (intervened or recovered) and the target's own
// noise enters additively or as an independent product factor. Returns
// nullopt when no analytic form applies.
std::optional<double> analytic_expected_counterfactual(
    const Scm& scm, const ConditioningEvent& event, const Intervention& iv,
    int target);

}  // namespace strategem
