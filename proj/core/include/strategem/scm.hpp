#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "strategem/rng.hpp"

namespace strategem {

using Assignment = std::vector<double>;       // one value per node, by index
using NoiseAssignment = std::vector<double>;  // one noise value per node

// ---------------------------------------------------------------------------
// Graph

struct Edge {
  int parent = -1;
  int child = -1;
};

// Directed graph over named nodes. Indices are dense (0..n-1) and names are
// unique. The graph may be cyclic while being inspected; evaluation entry
// points reject cyclic graphs.
class CausalDag {
 public:
  CausalDag() = default;
  CausalDag(std::vector<std::string> names, std::vector<Edge> edges);

  int node_count() const { return static_cast<int>(names_.size()); }
  const std::string& name(int node) const;
  const std::vector<std::string>& names() const { return names_; }
  std::optional<int> index_of(const std::string& name) const;

  const std::vector<int>& parents(int node) const;
  const std::vector<int>& children(int node) const;
  const std::vector<Edge>& edges() const { return edges_; }
  bool has_edge(int parent, int child) const;

  bool acyclic() const { return acyclic_; }

  // Nodes with a directed path to `node` (excluding the node itself).
  std::vector<int> ancestors_of(int node) const;
  // Nodes reachable from any of `sources` (excluding the sources themselves
  // unless reachable from another source).
  std::vector<int> descendants_of(std::span<const int> sources) const;

 private:
  friend std::vector<int> topological_order(const CausalDag& dag);

  std::vector<std::string> names_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
  std::vector<int> topo_;  // empty when cyclic
  bool acyclic_ = true;
};

// Undirected version of a dag: edges normalized to (low, high), sorted.
struct Skeleton {
  std::vector<std::string> names;
  std::vector<std::pair<int, int>> edges;
};

// Deterministic topological order with ties broken by ascending node index.
// Throws CyclicGraphError when no order exists.
std::vector<int> topological_order(const CausalDag& dag);

Skeleton skeleton_of(const CausalDag& dag);

// ---------------------------------------------------------------------------
// Noise

enum class NoiseLaw { Gaussian, Uniform, Rademacher, PointMass };

struct NoiseSpec {
  NoiseLaw law = NoiseLaw::Gaussian;
  // Gaussian: a = mean, b = stddev. Uniform: a = lo, b = hi.
  // PointMass: a = value. Rademacher has no parameters.
  double a = 0.0;
  double b = 1.0;

  static NoiseSpec gaussian(double mean, double stddev);
  static NoiseSpec uniform(double lo, double hi);
  static NoiseSpec rademacher();
  static NoiseSpec point_mass(double value);

  double sample(Rng& rng) const;
  double mean() const;
  bool well_formed() const;
};

// ---------------------------------------------------------------------------
// Structural functions
//
// Functions reference other nodes by index; the validator checks that every
// referenced node is a declared parent. ProductFn factors may also reference
// the node's own noise term via kOwnNoise.

inline constexpr int kOwnNoise = -1;

struct ConstantFn {
  double value = 0.0;
};

struct LinearFn {
  double offset = 0.0;
  std::vector<std::pair<int, double>> terms;  // (node, weight)
};

struct Monomial {
  double coeff = 0.0;
  std::vector<std::pair<int, int>> powers;  // (node, exponent >= 1)
};

struct PolynomialFn {
  std::vector<Monomial> terms;
};

struct ProductFn {
  int left = kOwnNoise;
  int right = kOwnNoise;
};

struct TabularAxis {
  int node = -1;
  double lo = 0.0;
  double hi = 1.0;
  int cells = 1;
};

// Piecewise-constant function over a grid of parent cells, row-major in the
// axis order. Probing outside any axis range raises EvaluationDomainError.
struct TabularFn {
  std::vector<TabularAxis> axes;
  std::vector<double> values;
};

using StructuralFn =
    std::variant<ConstantFn, LinearFn, PolynomialFn, ProductFn, TabularFn>;

double eval_structural(const StructuralFn& fn, std::span<const double> values,
                       double own_noise);
std::vector<int> referenced_nodes(const StructuralFn& fn);
bool references_own_noise(const StructuralFn& fn);

// ---------------------------------------------------------------------------
// Model

// Additive: X_j = g_j(pa) + U_j, noise exactly recoverable from a full
// observation. Embedded: U_j enters g_j itself (ProductFn may read it);
// such nodes are excluded from exact abduction.
enum class NoiseComposition { Additive, Embedded };

struct Scm {
  CausalDag dag;
  std::vector<StructuralFn> equations;
  std::vector<NoiseSpec> noises;
  std::vector<NoiseComposition> composition;
  double support_bound = 0.0;  // B, bound on |x|_inf over the initial law

  int node_count() const { return dag.node_count(); }
  bool is_anm() const;
  bool is_additive(int node) const;
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  CycleDetected,
  UndeclaredParent,
  MalformedNoise,
  MalformedEquation,
  NoiseInAdditiveEquation,
  DuplicateName,
  SizeMismatch,
};

struct Violation {
  ViolationKind kind;
  int node = -1;  // -1 when the defect is not tied to one node
  std::string message;
};

// Returns one record per defect; empty iff the model is well-formed.
std::vector<Violation> validate(const Scm& scm);

const char* violation_kind_name(ViolationKind kind);

// ---------------------------------------------------------------------------
// Evaluation and sampling

// Evaluates all equations in topological order. Pure: same noise, same
// result. Throws CyclicGraphError / EvaluationDomainError.
Assignment forward_eval(const Scm& scm, std::span<const double> noise);

struct Draw {
  Assignment values;
  NoiseAssignment noise;
};

// n i.i.d. draws, bit-reproducible given the seed. For additive nodes the
// returned noise is canonicalized to values[j] - g_j(pa), which makes
// forward_eval and abduction round-trip the draw bit-exactly.
std::vector<Draw> sample(const Scm& scm, long n, std::uint64_t seed);

// Max |x|_inf over n probe draws, scaled by `headroom`.
double estimate_support_bound(const Scm& scm, long n, std::uint64_t seed,
                              double headroom = 1.5);

struct RandomAnmSpec {
  int n_nodes = 4;
  double edge_probability = 0.5;
  double weight_lo = 0.5;  // |weight| range, weight_lo > 0
  double weight_hi = 2.0;
  std::uint64_t seed = 0;
};

// Random linear-Gaussian ANM: random topological order, each forward pair
// wired with the given probability, weights uniform in +-[lo, hi], unit
// Gaussian noise. support_bound is set from 1e4 probe samples.
Scm random_anm(const RandomAnmSpec& spec);

// Exact mean of a node's marginal when it propagates through means:
// linear/constant equations, and products where one factor is the node's own
// (independent) noise. Returns nullopt when the mean is not analytic.
std::optional<double> analytic_node_mean(const Scm& scm, int node);

}  // namespace strategem
