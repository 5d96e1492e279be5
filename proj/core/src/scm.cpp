#include "strategem/scm.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include "strategem/errors.hpp"

namespace strategem {

namespace {
constexpr std::uint64_t kSampleTag = 0x53414d50ULL;    // "SAMP"
constexpr std::uint64_t kAnmTag = 0x414e4dULL;         // "ANM"
constexpr std::uint64_t kProbeTag = 0x50524f4245ULL;   // "PROBE"
}  // namespace

// ---------------------------------------------------------------------------
// CausalDag

CausalDag::CausalDag(std::vector<std::string> names, std::vector<Edge> edges)
    : names_(std::move(names)), edges_(std::move(edges)) {
  int n = node_count();
  parents_.assign(static_cast<size_t>(n), {});
  children_.assign(static_cast<size_t>(n), {});
  for (const Edge& e : edges_) {
    if (e.parent < 0 || e.parent >= n || e.child < 0 || e.child >= n) {
      throw UnknownNodeError("edge references node index out of range");
    }
    parents_[static_cast<size_t>(e.child)].push_back(e.parent);
    children_[static_cast<size_t>(e.parent)].push_back(e.child);
  }
  for (auto& p : parents_) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
  }
  for (auto& c : children_) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }

  // Kahn's algorithm with a min-heap so ties resolve by ascending index.
  std::vector<int> indegree(static_cast<size_t>(n), 0);
  for (int v = 0; v < n; ++v) {
    indegree[static_cast<size_t>(v)] =
        static_cast<int>(parents_[static_cast<size_t>(v)].size());
  }
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int v = 0; v < n; ++v) {
    if (indegree[static_cast<size_t>(v)] == 0) {
      ready.push(v);
    }
  }
  topo_.reserve(static_cast<size_t>(n));
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    topo_.push_back(v);
    for (int c : children_[static_cast<size_t>(v)]) {
      if (--indegree[static_cast<size_t>(c)] == 0) {
        ready.push(c);
      }
    }
  }
  acyclic_ = static_cast<int>(topo_.size()) == n;
  if (!acyclic_) {
    topo_.clear();
  }
}

const std::string& CausalDag::name(int node) const {
  if (node < 0 || node >= node_count()) {
    throw UnknownNodeError("node index out of range");
  }
  return names_[static_cast<size_t>(node)];
}

std::optional<int> CausalDag::index_of(const std::string& name) const {
  for (int i = 0; i < node_count(); ++i) {
    if (names_[static_cast<size_t>(i)] == name) {
      return i;
    }
  }
  return std::nullopt;
}

const std::vector<int>& CausalDag::parents(int node) const {
  if (node < 0 || node >= node_count()) {
    throw UnknownNodeError("node index out of range");
  }
  return parents_[static_cast<size_t>(node)];
}

const std::vector<int>& CausalDag::children(int node) const {
  if (node < 0 || node >= node_count()) {
    throw UnknownNodeError("node index out of range");
  }
  return children_[static_cast<size_t>(node)];
}

bool CausalDag::has_edge(int parent, int child) const {
  if (child < 0 || child >= node_count()) {
    return false;
  }
  const auto& p = parents_[static_cast<size_t>(child)];
  return std::binary_search(p.begin(), p.end(), parent);
}

std::vector<int> CausalDag::ancestors_of(int node) const {
  if (node < 0 || node >= node_count()) {
    throw UnknownNodeError("node index out of range");
  }
  std::vector<bool> seen(static_cast<size_t>(node_count()), false);
  std::vector<int> stack{node};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int p : parents_[static_cast<size_t>(v)]) {
      if (!seen[static_cast<size_t>(p)]) {
        seen[static_cast<size_t>(p)] = true;
        stack.push_back(p);
      }
    }
  }
  std::vector<int> out;
  for (int v = 0; v < node_count(); ++v) {
    if (seen[static_cast<size_t>(v)]) {
      out.push_back(v);
    }
  }
  return out;
}

std::vector<int> CausalDag::descendants_of(std::span<const int> sources) const {
  std::vector<bool> seen(static_cast<size_t>(node_count()), false);
  std::vector<int> stack;
  for (int s : sources) {
    if (s < 0 || s >= node_count()) {
      throw UnknownNodeError("node index out of range");
    }
    stack.push_back(s);
  }
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int c : children_[static_cast<size_t>(v)]) {
      if (!seen[static_cast<size_t>(c)]) {
        seen[static_cast<size_t>(c)] = true;
        stack.push_back(c);
      }
    }
  }
  std::vector<int> out;
  for (int v = 0; v < node_count(); ++v) {
    if (seen[static_cast<size_t>(v)]) {
      out.push_back(v);
    }
  }
  return out;
}

std::vector<int> topological_order(const CausalDag& dag) {
  if (!dag.acyclic_) {
    throw CyclicGraphError("graph has no topological order (cycle present)");
  }
  return dag.topo_;
}

Skeleton skeleton_of(const CausalDag& dag) {
  Skeleton sk;
  sk.names = dag.names();
  std::set<std::pair<int, int>> undirected;
  for (const Edge& e : dag.edges()) {
    undirected.insert({std::min(e.parent, e.child),
                       std::max(e.parent, e.child)});
  }
  sk.edges.assign(undirected.begin(), undirected.end());
  return sk;
}

// ---------------------------------------------------------------------------
// NoiseSpec

NoiseSpec NoiseSpec::gaussian(double mean, double stddev) {
  return {NoiseLaw::Gaussian, mean, stddev};
}

NoiseSpec NoiseSpec::uniform(double lo, double hi) {
  return {NoiseLaw::Uniform, lo, hi};
}

NoiseSpec NoiseSpec::rademacher() { return {NoiseLaw::Rademacher, 0.0, 0.0}; }

NoiseSpec NoiseSpec::point_mass(double value) {
  return {NoiseLaw::PointMass, value, 0.0};
}

double NoiseSpec::sample(Rng& rng) const {
  switch (law) {
    case NoiseLaw::Gaussian:
      return a + b * rng.next_gaussian();
    case NoiseLaw::Uniform:
      return rng.next_uniform(a, b);
    case NoiseLaw::Rademacher:
      return rng.next_rademacher();
    case NoiseLaw::PointMass:
      return a;
  }
  throw Error("unreachable noise law");
}

double NoiseSpec::mean() const {
  switch (law) {
    case NoiseLaw::Gaussian:
      return a;
    case NoiseLaw::Uniform:
      return 0.5 * (a + b);
    case NoiseLaw::Rademacher:
      return 0.0;
    case NoiseLaw::PointMass:
      return a;
  }
  throw Error("unreachable noise law");
}

bool NoiseSpec::well_formed() const {
  switch (law) {
    case NoiseLaw::Gaussian:
      return std::isfinite(a) && std::isfinite(b) && b > 0.0;
    case NoiseLaw::Uniform:
      return std::isfinite(a) && std::isfinite(b) && a < b;
    case NoiseLaw::Rademacher:
      return true;
    case NoiseLaw::PointMass:
      return std::isfinite(a);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Structural functions

namespace {

size_t tabular_flat_index(const TabularFn& fn, std::span<const double> values) {
  size_t flat = 0;
  for (const TabularAxis& ax : fn.axes) {
    double x = values[static_cast<size_t>(ax.node)];
    if (!(x >= ax.lo && x <= ax.hi)) {
      std::ostringstream msg;
      msg << "tabular probe " << x << " outside grid [" << ax.lo << ", "
          << ax.hi << "] on axis node " << ax.node;
      throw EvaluationDomainError(msg.str());
    }
    double step = (ax.hi - ax.lo) / ax.cells;
    int cell = static_cast<int>((x - ax.lo) / step);
    if (cell >= ax.cells) {
      cell = ax.cells - 1;  // x == hi maps to the last cell
    }
    flat = flat * static_cast<size_t>(ax.cells) + static_cast<size_t>(cell);
  }
  return flat;
}

}  // namespace

double eval_structural(const StructuralFn& fn, std::span<const double> values,
                       double own_noise) {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantFn>) {
          return f.value;
        } else if constexpr (std::is_same_v<T, LinearFn>) {
          double acc = f.offset;
          for (const auto& [node, w] : f.terms) {
            acc += w * values[static_cast<size_t>(node)];
          }
          return acc;
        } else if constexpr (std::is_same_v<T, PolynomialFn>) {
          double acc = 0.0;
          for (const Monomial& m : f.terms) {
            double term = m.coeff;
            for (const auto& [node, p] : m.powers) {
              double base = values[static_cast<size_t>(node)];
              for (int k = 0; k < p; ++k) {
                term *= base;
              }
            }
            acc += term;
          }
          return acc;
        } else if constexpr (std::is_same_v<T, ProductFn>) {
          double l = f.left == kOwnNoise
                         ? own_noise
                         : values[static_cast<size_t>(f.left)];
          double r = f.right == kOwnNoise
                         ? own_noise
                         : values[static_cast<size_t>(f.right)];
          return l * r;
        } else {
          static_assert(std::is_same_v<T, TabularFn>);
          return f.values[tabular_flat_index(f, values)];
        }
      },
      fn);
}

std::vector<int> referenced_nodes(const StructuralFn& fn) {
  std::vector<int> out;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, LinearFn>) {
          for (const auto& [node, w] : f.terms) {
            (void)w;
            out.push_back(node);
          }
        } else if constexpr (std::is_same_v<T, PolynomialFn>) {
          for (const Monomial& m : f.terms) {
            for (const auto& [node, p] : m.powers) {
              (void)p;
              out.push_back(node);
            }
          }
        } else if constexpr (std::is_same_v<T, ProductFn>) {
          if (f.left != kOwnNoise) {
            out.push_back(f.left);
          }
          if (f.right != kOwnNoise) {
            out.push_back(f.right);
          }
        } else if constexpr (std::is_same_v<T, TabularFn>) {
          for (const TabularAxis& ax : f.axes) {
            out.push_back(ax.node);
          }
        }
      },
      fn);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool references_own_noise(const StructuralFn& fn) {
  if (const auto* p = std::get_if<ProductFn>(&fn)) {
    return p->left == kOwnNoise || p->right == kOwnNoise;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Scm

bool Scm::is_additive(int node) const {
  return composition[static_cast<size_t>(node)] == NoiseComposition::Additive;
}

bool Scm::is_anm() const {
  for (int i = 0; i < node_count(); ++i) {
    if (!is_additive(i)) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Validation

const char* violation_kind_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::CycleDetected:
      return "CycleDetected";
    case ViolationKind::UndeclaredParent:
      return "UndeclaredParent";
    case ViolationKind::MalformedNoise:
      return "MalformedNoise";
    case ViolationKind::MalformedEquation:
      return "MalformedEquation";
    case ViolationKind::NoiseInAdditiveEquation:
      return "NoiseInAdditiveEquation";
    case ViolationKind::DuplicateName:
      return "DuplicateName";
    case ViolationKind::SizeMismatch:
      return "SizeMismatch";
  }
  return "Unknown";
}

std::vector<Violation> validate(const Scm& scm) {
  std::vector<Violation> out;
  int n = scm.node_count();

  auto note = [&out](ViolationKind kind, int node, std::string msg) {
    out.push_back({kind, node, std::move(msg)});
  };

  if (scm.equations.size() != static_cast<size_t>(n) ||
      scm.noises.size() != static_cast<size_t>(n) ||
      scm.composition.size() != static_cast<size_t>(n)) {
    note(ViolationKind::SizeMismatch, -1,
         "equations/noises/composition must each cover every node");
    return out;  // indices below would be unsafe
  }

  if (!scm.dag.acyclic()) {
    note(ViolationKind::CycleDetected, -1, "graph contains a directed cycle");
  }

  std::set<std::string> seen;
  for (int i = 0; i < n; ++i) {
    const std::string& nm = scm.dag.name(i);
    if (nm.empty()) {
      note(ViolationKind::DuplicateName, i, "node name is empty");
    } else if (!seen.insert(nm).second) {
      note(ViolationKind::DuplicateName, i, "duplicate node name '" + nm + "'");
    }
  }

  for (int i = 0; i < n; ++i) {
    const StructuralFn& fn = scm.equations[static_cast<size_t>(i)];
    const auto& parents = scm.dag.parents(i);
    for (int ref : referenced_nodes(fn)) {
      if (ref < 0 || ref >= n) {
        note(ViolationKind::UndeclaredParent, i,
             "equation of '" + scm.dag.name(i) +
                 "' references node index out of range");
      } else if (!std::binary_search(parents.begin(), parents.end(), ref)) {
        note(ViolationKind::UndeclaredParent, i,
             "equation of '" + scm.dag.name(i) + "' references non-parent '" +
                 scm.dag.name(ref) + "'");
      }
    }
    if (scm.is_additive(i) && references_own_noise(fn)) {
      note(ViolationKind::NoiseInAdditiveEquation, i,
           "additive node '" + scm.dag.name(i) +
               "' must not also embed its noise in the equation");
    }
    if (const auto* tab = std::get_if<TabularFn>(&fn)) {
      size_t expect = 1;
      bool axes_ok = true;
      for (const TabularAxis& ax : tab->axes) {
        if (!(ax.lo < ax.hi) || ax.cells < 1) {
          note(ViolationKind::MalformedEquation, i,
               "tabular axis of '" + scm.dag.name(i) +
                   "' needs lo < hi and cells >= 1");
          axes_ok = false;
        } else {
          expect *= static_cast<size_t>(ax.cells);
        }
      }
      if (axes_ok && tab->values.size() != expect) {
        note(ViolationKind::MalformedEquation, i,
             "tabular values of '" + scm.dag.name(i) +
                 "' must have one entry per grid cell");
      }
    }
    if (const auto* lin = std::get_if<LinearFn>(&fn)) {
      for (const auto& [node, w] : lin->terms) {
        (void)node;
        if (!std::isfinite(w)) {
          note(ViolationKind::MalformedEquation, i,
               "linear weight of '" + scm.dag.name(i) + "' is not finite");
        }
      }
    }
    if (!scm.noises[static_cast<size_t>(i)].well_formed()) {
      note(ViolationKind::MalformedNoise, i,
           "noise spec of '" + scm.dag.name(i) + "' is malformed");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation and sampling

Assignment forward_eval(const Scm& scm, std::span<const double> noise) {
  int n = scm.node_count();
  if (noise.size() != static_cast<size_t>(n)) {
    throw DimensionMismatchError("noise vector must cover every node");
  }
  Assignment values(static_cast<size_t>(n), 0.0);
  for (int i : topological_order(scm.dag)) {
    double u = noise[static_cast<size_t>(i)];
    double base =
        eval_structural(scm.equations[static_cast<size_t>(i)], values, u);
    values[static_cast<size_t>(i)] = scm.is_additive(i) ? base + u : base;
  }
  return values;
}

std::vector<Draw> sample(const Scm& scm, long n, std::uint64_t seed) {
  int nodes = scm.node_count();
  std::vector<int> topo = topological_order(scm.dag);
  std::vector<Draw> out(static_cast<size_t>(n));
  for (long k = 0; k < n; ++k) {
    Rng rng = derive_rng(seed, {kSampleTag, static_cast<std::uint64_t>(k)});
    Draw& d = out[static_cast<size_t>(k)];
    d.noise.resize(static_cast<size_t>(nodes));
    d.values.resize(static_cast<size_t>(nodes));
    for (int i = 0; i < nodes; ++i) {
      d.noise[static_cast<size_t>(i)] =
          scm.noises[static_cast<size_t>(i)].sample(rng);
    }
    for (int i : topo) {
      double u = d.noise[static_cast<size_t>(i)];
      double base =
          eval_structural(scm.equations[static_cast<size_t>(i)], d.values, u);
      if (scm.is_additive(i)) {
        // Canonicalize (value, noise) to a joint fixpoint of
        //   x = base + u, u = x - base
        // so abduction and forward evaluation round-trip bit-exactly.
        // One pass is not always enough under round-to-nearest; a couple
        // of iterations always settle in practice.
        double x = base + u;
        for (int pass = 0; pass < 8; ++pass) {
          double u_next = x - base;
          double x_next = base + u_next;
          if (u_next == u && x_next == x) {
            break;
          }
          u = u_next;
          x = x_next;
        }
        d.values[static_cast<size_t>(i)] = x;
        d.noise[static_cast<size_t>(i)] = u;
      } else {
        d.values[static_cast<size_t>(i)] = base;
      }
    }
  }
  return out;
}

double estimate_support_bound(const Scm& scm, long n, std::uint64_t seed,
                              double headroom) {
  double max_abs = 0.0;
  for (const Draw& d : sample(scm, n, seed)) {
    for (double v : d.values) {
      max_abs = std::max(max_abs, std::fabs(v));
    }
  }
  return headroom * max_abs;
}

Scm random_anm(const RandomAnmSpec& spec) {
  if (spec.n_nodes < 1 || !(spec.weight_lo > 0.0) ||
      spec.weight_hi < spec.weight_lo) {
    throw Error("random_anm: need n_nodes >= 1 and 0 < weight_lo <= weight_hi");
  }
  Rng rng = derive_rng(spec.seed, {kAnmTag});

  int n = spec.n_nodes;
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    order[static_cast<size_t>(i)] = i;
  }
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
  }

  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    names.push_back("X" + std::to_string(i + 1));
  }

  std::vector<Edge> edges;
  std::vector<LinearFn> fns(static_cast<size_t>(n));
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      int parent = order[static_cast<size_t>(a)];
      int child = order[static_cast<size_t>(b)];
      if (rng.next_double() < spec.edge_probability) {
        double w = rng.next_uniform(spec.weight_lo, spec.weight_hi);
        if (rng.next_u64() & 1ULL) {
          w = -w;
        }
        edges.push_back({parent, child});
        fns[static_cast<size_t>(child)].terms.push_back({parent, w});
      }
    }
  }

  Scm scm;
  scm.dag = CausalDag(std::move(names), std::move(edges));
  scm.equations.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    LinearFn& fn = fns[static_cast<size_t>(i)];
    std::sort(fn.terms.begin(), fn.terms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (fn.terms.empty()) {
      scm.equations.emplace_back(ConstantFn{0.0});
    } else {
      scm.equations.emplace_back(std::move(fn));
    }
  }
  scm.noises.assign(static_cast<size_t>(n), NoiseSpec::gaussian(0.0, 1.0));
  scm.composition.assign(static_cast<size_t>(n), NoiseComposition::Additive);
  scm.support_bound =
      estimate_support_bound(scm, 10000, mix_u64(spec.seed ^ kProbeTag));
  return scm;
}

// ---------------------------------------------------------------------------
// Analytic means

std::optional<double> analytic_node_mean(const Scm& scm, int node) {
  if (node < 0 || node >= scm.node_count()) {
    throw UnknownNodeError("node index out of range");
  }
  std::vector<std::optional<double>> mean(
      static_cast<size_t>(scm.node_count()));
  for (int i : topological_order(scm.dag)) {
    const StructuralFn& fn = scm.equations[static_cast<size_t>(i)];
    double noise_mean = scm.noises[static_cast<size_t>(i)].mean();
    std::optional<double> base;
    if (const auto* c = std::get_if<ConstantFn>(&fn)) {
      base = c->value;
    } else if (const auto* lin = std::get_if<LinearFn>(&fn)) {
      // Linearity needs no independence assumptions.
      double acc = lin->offset;
      bool ok = true;
      for (const auto& [p, w] : lin->terms) {
        if (!mean[static_cast<size_t>(p)]) {
          ok = false;
          break;
        }
        acc += w * *mean[static_cast<size_t>(p)];
      }
      if (ok) {
        base = acc;
      }
    } else if (const auto* prod = std::get_if<ProductFn>(&fn)) {
      // Own noise is independent of every parent, so the mean factorizes
      // when exactly one side is the noise term.
      bool left_noise = prod->left == kOwnNoise;
      bool right_noise = prod->right == kOwnNoise;
      if (left_noise != right_noise) {
        int p = left_noise ? prod->right : prod->left;
        if (mean[static_cast<size_t>(p)]) {
          base = *mean[static_cast<size_t>(p)] * noise_mean;
        }
      }
    }
    if (!base) {
      mean[static_cast<size_t>(i)] = std::nullopt;
      continue;
    }
    mean[static_cast<size_t>(i)] =
        scm.is_additive(i) ? *base + noise_mean : *base;
  }
  return mean[static_cast<size_t>(node)];
}

}  // namespace strategem
