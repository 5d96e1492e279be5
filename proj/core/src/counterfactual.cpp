#include "strategem/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "strategem/errors.hpp"
#include "strategem/stats.hpp"

namespace strategem {

namespace {

constexpr std::uint64_t kCfTag = 0x434f554e54ULL;  // "COUNT"

// Tolerance for "the observed value contradicts a point-mass noise". The
// recovered residual of a consistent observation differs from the mass point
// only by rounding, many orders below this.
constexpr double kPointMassTol = 1e-9;

void check_node(const Scm& scm, int node, const char* what) {
  if (node < 0 || node >= scm.node_count()) {
    std::ostringstream msg;
    msg << what << " node index " << node << " out of range";
    throw UnknownNodeError(msg.str());
  }
}

std::vector<std::optional<double>> observation_map(const Scm& scm,
                                                   const ConditioningEvent& e) {
  std::vector<std::optional<double>> obs(
      static_cast<size_t>(scm.node_count()));
  for (const auto& [node, value] : e.observed) {
    check_node(scm, node, "observed");
    obs[static_cast<size_t>(node)] = value;
  }
  return obs;
}

// Mask of `target` plus its ancestors in `dag`.
std::vector<bool> ancestral_mask(const CausalDag& dag, int target) {
  std::vector<bool> mask(static_cast<size_t>(dag.node_count()), false);
  mask[static_cast<size_t>(target)] = true;
  for (int a : dag.ancestors_of(target)) {
    mask[static_cast<size_t>(a)] = true;
  }
  return mask;
}

AbductionResult abduce_scoped(const Scm& scm, const ConditioningEvent& event,
                              const std::vector<bool>* relevant) {
  auto obs = observation_map(scm, event);
  int n = scm.node_count();
  AbductionResult out;
  for (int j = 0; j < n; ++j) {
    bool recoverable = obs[static_cast<size_t>(j)].has_value();
    if (recoverable) {
      for (int p : scm.dag.parents(j)) {
        if (!obs[static_cast<size_t>(p)]) {
          recoverable = false;
          break;
        }
      }
    }
    if (!recoverable) {
      out.free_nodes.push_back(j);
      continue;
    }
    if (!scm.is_additive(j)) {
      if (relevant == nullptr || (*relevant)[static_cast<size_t>(j)]) {
        throw NonAdditiveAbductionError(
            "event demands the noise of embedded node '" + scm.dag.name(j) +
            "', which is not uniquely invertible");
      }
      out.free_nodes.push_back(j);
      continue;
    }
    // All parents observed: evaluate g_j directly on the observed values.
    Assignment values(static_cast<size_t>(n), 0.0);
    for (int p : scm.dag.parents(j)) {
      values[static_cast<size_t>(p)] = *obs[static_cast<size_t>(p)];
    }
    double g = eval_structural(scm.equations[static_cast<size_t>(j)], values,
                               0.0);
    double u = *obs[static_cast<size_t>(j)] - g;
    const NoiseSpec& noise = scm.noises[static_cast<size_t>(j)];
    if (noise.law == NoiseLaw::PointMass &&
        std::fabs(u - noise.a) >
            kPointMassTol * std::max(1.0, std::fabs(noise.a))) {
      std::ostringstream msg;
      msg << "observed value of '" << scm.dag.name(j)
          << "' contradicts its point-mass noise (residual " << u
          << ", mass at " << noise.a << ")";
      throw InconsistentEventError(msg.str());
    }
    out.recovered.push_back({j, u});
  }
  return out;
}

// A forced node keeps the intervention value exactly: whatever noise the
// event pinned for it belongs to the factual world and must not be re-added
// on top of the surgered constant.
void drop_intervened_noise(AbductionResult& ab, const Intervention& iv) {
  if (iv.empty()) {
    return;
  }
  auto dropped = std::remove_if(
      ab.recovered.begin(), ab.recovered.end(),
      [&](const std::pair<int, double>& e) {
        return iv.value_for(e.first).has_value();
      });
  for (auto it = dropped; it != ab.recovered.end(); ++it) {
    ab.free_nodes.push_back(it->first);
  }
  ab.recovered.erase(dropped, ab.recovered.end());
  std::sort(ab.free_nodes.begin(), ab.free_nodes.end());
}

struct DetState {
  std::vector<std::optional<double>> value;
};

// Propagates exactly-determined values through the intervened model: forced
// nodes, nodes with recovered noise, point-mass additive nodes, and embedded
// nodes whose equation ignores their noise.
DetState propagate_determined(const Scm& surgered, const AbductionResult& ab) {
  int n = surgered.node_count();
  DetState st;
  st.value.assign(static_cast<size_t>(n), std::nullopt);
  Assignment scratch(static_cast<size_t>(n), 0.0);
  for (int j : topological_order(surgered.dag)) {
    bool parents_det = true;
    for (int p : surgered.dag.parents(j)) {
      if (!st.value[static_cast<size_t>(p)]) {
        parents_det = false;
        break;
      }
      scratch[static_cast<size_t>(p)] = *st.value[static_cast<size_t>(p)];
    }
    if (!parents_det) {
      continue;
    }
    const StructuralFn& fn = surgered.equations[static_cast<size_t>(j)];
    const NoiseSpec& noise = surgered.noises[static_cast<size_t>(j)];
    std::optional<double> u = ab.recovered_for(j);
    if (surgered.is_additive(j)) {
      if (!u && noise.law == NoiseLaw::PointMass) {
        u = noise.a;
      }
      if (u) {
        double g = eval_structural(fn, scratch, 0.0);
        st.value[static_cast<size_t>(j)] = g + *u;
      }
    } else if (!references_own_noise(fn)) {
      st.value[static_cast<size_t>(j)] = eval_structural(fn, scratch, 0.0);
    }
  }
  return st;
}

}  // namespace

// ---------------------------------------------------------------------------
// Small struct helpers

Intervention Intervention::set(int node, double value) {
  Intervention iv;
  iv.targets.push_back({node, value});
  return iv;
}

Intervention& Intervention::and_set(int node, double value) {
  auto it = std::lower_bound(
      targets.begin(), targets.end(), node,
      [](const auto& entry, int key) { return entry.first < key; });
  if (it != targets.end() && it->first == node) {
    it->second = value;
  } else {
    targets.insert(it, {node, value});
  }
  return *this;
}

std::optional<double> Intervention::value_for(int node) const {
  for (const auto& [k, v] : targets) {
    if (k == node) {
      return v;
    }
  }
  return std::nullopt;
}

ConditioningEvent ConditioningEvent::of(std::span<const int> nodes,
                                        std::span<const double> values) {
  if (nodes.size() != values.size()) {
    throw DimensionMismatchError(
        "ConditioningEvent::of: nodes and values differ in length");
  }
  ConditioningEvent e;
  for (size_t i = 0; i < nodes.size(); ++i) {
    e.observed.push_back({nodes[i], values[i]});
  }
  std::sort(e.observed.begin(), e.observed.end());
  return e;
}

ConditioningEvent ConditioningEvent::all(const Assignment& values) {
  ConditioningEvent e;
  for (size_t i = 0; i < values.size(); ++i) {
    e.observed.push_back({static_cast<int>(i), values[i]});
  }
  return e;
}

ConditioningEvent ConditioningEvent::all_except(const Assignment& values,
                                                int skip) {
  ConditioningEvent e;
  for (size_t i = 0; i < values.size(); ++i) {
    if (static_cast<int>(i) != skip) {
      e.observed.push_back({static_cast<int>(i), values[i]});
    }
  }
  return e;
}

std::optional<double> ConditioningEvent::value_for(int node) const {
  for (const auto& [k, v] : observed) {
    if (k == node) {
      return v;
    }
  }
  return std::nullopt;
}

std::optional<double> AbductionResult::recovered_for(int node) const {
  for (const auto& [k, v] : recovered) {
    if (k == node) {
      return v;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Operations

Scm intervene(const Scm& scm, const Intervention& iv) {
  for (const auto& [node, value] : iv.targets) {
    check_node(scm, node, "intervention");
    (void)value;
  }
  Scm out = scm;
  std::vector<Edge> kept;
  for (const Edge& e : scm.dag.edges()) {
    if (!iv.value_for(e.child)) {
      kept.push_back(e);
    }
  }
  out.dag = CausalDag(scm.dag.names(), std::move(kept));
  for (const auto& [node, value] : iv.targets) {
    out.equations[static_cast<size_t>(node)] = ConstantFn{value};
    out.noises[static_cast<size_t>(node)] = NoiseSpec::point_mass(0.0);
    out.composition[static_cast<size_t>(node)] = NoiseComposition::Additive;
  }
  return out;
}

AbductionResult abduce(const Scm& scm, const ConditioningEvent& event,
                       std::optional<int> query_node) {
  if (query_node) {
    check_node(scm, *query_node, "query");
    auto mask = ancestral_mask(scm.dag, *query_node);
    return abduce_scoped(scm, event, &mask);
  }
  return abduce_scoped(scm, event, nullptr);
}

double counterfactual_value(const Scm& scm, const Assignment& observed,
                            const Intervention& iv, int target) {
  check_node(scm, target, "target");
  if (observed.size() != static_cast<size_t>(scm.node_count())) {
    throw DimensionMismatchError(
        "counterfactual_value requires a full observation");
  }
  if (auto forced = iv.value_for(target)) {
    return *forced;
  }
  if (iv.empty()) {
    return observed[static_cast<size_t>(target)];
  }
  for (const auto& [node, value] : iv.targets) {
    check_node(scm, node, "intervention");
    (void)value;
  }

  // Nodes that can actually change: descendants of the targets that still
  // have a directed path to `target` once the targets' in-edges are cut.
  std::vector<int> iv_nodes;
  iv_nodes.reserve(iv.targets.size());
  for (const auto& [node, value] : iv.targets) {
    (void)value;
    iv_nodes.push_back(node);
  }
  std::vector<int> desc = scm.dag.descendants_of(iv_nodes);
  std::vector<bool> is_desc(static_cast<size_t>(scm.node_count()), false);
  for (int d : desc) {
    is_desc[static_cast<size_t>(d)] = true;
  }
  if (!is_desc[static_cast<size_t>(target)]) {
    return observed[static_cast<size_t>(target)];
  }

  Scm surgered = intervene(scm, iv);
  std::vector<bool> relevant = ancestral_mask(surgered.dag, target);

  Assignment values = observed;
  for (const auto& [node, value] : iv.targets) {
    values[static_cast<size_t>(node)] = value;
  }
  for (int j : topological_order(surgered.dag)) {
    if (!is_desc[static_cast<size_t>(j)] ||
        !relevant[static_cast<size_t>(j)] || iv.value_for(j)) {
      continue;
    }
    if (!scm.is_additive(j)) {
      throw NonAdditiveAbductionError(
          "deterministic counterfactual through embedded node '" +
          scm.dag.name(j) + "' is not defined; use expected_counterfactual");
    }
    // Recover the noise from the factual observation, then re-apply it to
    // the counterfactual parent values.
    double g_factual =
        eval_structural(scm.equations[static_cast<size_t>(j)], observed, 0.0);
    double u = observed[static_cast<size_t>(j)] - g_factual;
    double g_cf =
        eval_structural(scm.equations[static_cast<size_t>(j)], values, 0.0);
    values[static_cast<size_t>(j)] = g_cf + u;
  }
  return values[static_cast<size_t>(target)];
}

McEstimate expected_counterfactual(const Scm& scm,
                                   const ConditioningEvent& event,
                                   const Intervention& iv, int target,
                                   const McSpec& mc) {
  check_node(scm, target, "target");
  if (mc.n < 1) {
    throw Error("expected_counterfactual: mc.n must be positive");
  }
  Scm surgered = intervene(scm, iv);
  std::vector<bool> needed = ancestral_mask(surgered.dag, target);
  AbductionResult ab = abduce_scoped(scm, event, &needed);
  drop_intervened_noise(ab, iv);

  auto obs = observation_map(scm, event);
  int n = scm.node_count();
  std::vector<std::optional<double>> fixed_noise(static_cast<size_t>(n));
  for (const auto& [node, u] : ab.recovered) {
    fixed_noise[static_cast<size_t>(node)] = u;
  }
  for (int j = 0; j < n; ++j) {
    if (!needed[static_cast<size_t>(j)] || iv.value_for(j) ||
        fixed_noise[static_cast<size_t>(j)]) {
      continue;
    }
    if (obs[static_cast<size_t>(j)]) {
      throw UnsupportedConditioningError(
          "target depends on the noise of observed node '" + scm.dag.name(j) +
          "', which the event constrains but abduction cannot pin");
    }
  }

  std::vector<double> draws(static_cast<size_t>(mc.n));
  NoiseAssignment noise(static_cast<size_t>(n), 0.0);
  for (long r = 0; r < mc.n; ++r) {
    Rng rng = derive_rng(mc.seed, {kCfTag, static_cast<std::uint64_t>(r)});
    for (int j = 0; j < n; ++j) {
      if (fixed_noise[static_cast<size_t>(j)]) {
        noise[static_cast<size_t>(j)] = *fixed_noise[static_cast<size_t>(j)];
      } else {
        noise[static_cast<size_t>(j)] =
            surgered.noises[static_cast<size_t>(j)].sample(rng);
      }
    }
    draws[static_cast<size_t>(r)] =
        forward_eval(surgered, noise)[static_cast<size_t>(target)];
  }
  MeanSe ms = mean_and_se(draws);
  return {ms.mean, ms.std_error, ms.n};
}

std::optional<double> analytic_expected_counterfactual(
    const Scm& scm, const ConditioningEvent& event, const Intervention& iv,
    int target) {
  check_node(scm, target, "target");
  Scm surgered = intervene(scm, iv);
  std::vector<bool> needed = ancestral_mask(surgered.dag, target);
  AbductionResult ab = abduce_scoped(scm, event, &needed);
  drop_intervened_noise(ab, iv);
  DetState det = propagate_determined(surgered, ab);
  if (det.value[static_cast<size_t>(target)]) {
    return det.value[static_cast<size_t>(target)];
  }

  Assignment scratch(static_cast<size_t>(scm.node_count()), 0.0);
  for (int p : surgered.dag.parents(target)) {
    if (!det.value[static_cast<size_t>(p)]) {
      return std::nullopt;
    }
    scratch[static_cast<size_t>(p)] = *det.value[static_cast<size_t>(p)];
  }
  const StructuralFn& fn = surgered.equations[static_cast<size_t>(target)];
  const NoiseSpec& noise = surgered.noises[static_cast<size_t>(target)];
  if (surgered.is_additive(target)) {
    return eval_structural(fn, scratch, 0.0) + noise.mean();
  }
  if (const auto* prod = std::get_if<ProductFn>(&fn)) {
    bool left_noise = prod->left == kOwnNoise;
    bool right_noise = prod->right == kOwnNoise;
    if (left_noise != right_noise) {
      int p = left_noise ? prod->right : prod->left;
      return scratch[static_cast<size_t>(p)] * noise.mean();
    }
  }
  return std::nullopt;
}

}  // namespace strategem
