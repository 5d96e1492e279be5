#include "strategem/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "strategem/errors.hpp"

namespace strategem {

namespace {

using nlohmann::json;

constexpr std::uint64_t kSupportProbeSeed = 0x53555050;

[[noreturn]] void fail(const std::string& message) {
  throw ScenarioError(message);
}

const json& require(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) {
    fail(ctx + ": expected an object with field '" + std::string(key) + "'");
  }
  auto it = j.find(key);
  if (it == j.end()) {
    fail(ctx + ": missing field '" + std::string(key) + "'");
  }
  return *it;
}

double as_double(const json& j, const std::string& ctx) {
  if (!j.is_number()) {
    fail(ctx + ": expected a number");
  }
  return j.get<double>();
}

long as_long(const json& j, const std::string& ctx) {
  if (!j.is_number_integer()) {
    fail(ctx + ": expected an integer");
  }
  return j.get<long>();
}

std::string as_string(const json& j, const std::string& ctx) {
  if (!j.is_string()) {
    fail(ctx + ": expected a string");
  }
  return j.get<std::string>();
}

double opt_double(const json& j, const char* key, double fallback,
                  const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) {
    return fallback;
  }
  return as_double(j.at(key), ctx + "." + key);
}

long opt_long(const json& j, const char* key, long fallback,
              const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) {
    return fallback;
  }
  return as_long(j.at(key), ctx + "." + key);
}

std::string opt_string(const json& j, const char* key,
                       const std::string& fallback, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) {
    return fallback;
  }
  return as_string(j.at(key), ctx + "." + key);
}

bool opt_bool(const json& j, const char* key, bool fallback,
              const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) {
    return fallback;
  }
  const json& v = j.at(key);
  if (!v.is_boolean()) {
    fail(ctx + "." + key + ": expected a boolean");
  }
  return v.get<bool>();
}

int node_index(const std::vector<std::string>& names, const std::string& name,
               const std::string& ctx) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    fail(ctx + ": unknown node '" + name + "'");
  }
  return static_cast<int>(it - names.begin());
}

NoiseSpec parse_noise(const json& j, const std::string& ctx) {
  std::string law = as_string(require(j, "law", ctx), ctx + ".law");
  if (law == "gaussian") {
    return NoiseSpec::gaussian(opt_double(j, "mean", 0.0, ctx),
                               opt_double(j, "sd", 1.0, ctx));
  }
  if (law == "uniform") {
    return NoiseSpec::uniform(as_double(require(j, "lo", ctx), ctx + ".lo"),
                              as_double(require(j, "hi", ctx), ctx + ".hi"));
  }
  if (law == "rademacher") {
    return NoiseSpec::rademacher();
  }
  if (law == "point_mass") {
    return NoiseSpec::point_mass(
        as_double(require(j, "value", ctx), ctx + ".value"));
  }
  fail(ctx + ".law: unknown noise law '" + law + "'");
}

int parse_factor(const json& j, const std::vector<std::string>& names,
                 const std::string& ctx) {
  if (j.is_string() && j.get<std::string>() == "noise") {
    return kOwnNoise;
  }
  return node_index(names, as_string(j, ctx), ctx);
}

StructuralFn parse_equation(const json& j,
                            const std::vector<std::string>& names,
                            const std::string& ctx) {
  std::string form = as_string(require(j, "form", ctx), ctx + ".form");
  if (form == "constant") {
    return ConstantFn{opt_double(j, "value", 0.0, ctx)};
  }
  if (form == "linear") {
    LinearFn fn;
    fn.offset = opt_double(j, "offset", 0.0, ctx);
    const json& terms = require(j, "terms", ctx);
    if (!terms.is_array()) {
      fail(ctx + ".terms: expected an array");
    }
    for (size_t k = 0; k < terms.size(); ++k) {
      std::string tctx = ctx + ".terms[" + std::to_string(k) + "]";
      const json& t = terms[k];
      int node = node_index(names, as_string(require(t, "node", tctx),
                                             tctx + ".node"),
                            tctx + ".node");
      double weight =
          as_double(require(t, "weight", tctx), tctx + ".weight");
      fn.terms.push_back({node, weight});
    }
    std::sort(fn.terms.begin(), fn.terms.end());
    return fn;
  }
  if (form == "polynomial") {
    PolynomialFn fn;
    const json& terms = require(j, "terms", ctx);
    if (!terms.is_array()) {
      fail(ctx + ".terms: expected an array");
    }
    for (size_t k = 0; k < terms.size(); ++k) {
      std::string tctx = ctx + ".terms[" + std::to_string(k) + "]";
      const json& t = terms[k];
      Monomial mono;
      mono.coeff = as_double(require(t, "coeff", tctx), tctx + ".coeff");
      const json& powers = require(t, "powers", tctx);
      if (!powers.is_array()) {
        fail(tctx + ".powers: expected an array");
      }
      for (size_t p = 0; p < powers.size(); ++p) {
        std::string pctx = tctx + ".powers[" + std::to_string(p) + "]";
        const json& pw = powers[p];
        int node = node_index(names, as_string(require(pw, "node", pctx),
                                               pctx + ".node"),
                              pctx + ".node");
        int power = static_cast<int>(
            as_long(require(pw, "power", pctx), pctx + ".power"));
        mono.powers.push_back({node, power});
      }
      fn.terms.push_back(std::move(mono));
    }
    return fn;
  }
  if (form == "product") {
    ProductFn fn;
    fn.left = parse_factor(require(j, "left", ctx), names, ctx + ".left");
    fn.right = parse_factor(require(j, "right", ctx), names, ctx + ".right");
    return fn;
  }
  if (form == "tabular") {
    TabularFn fn;
    const json& axes = require(j, "axes", ctx);
    if (!axes.is_array()) {
      fail(ctx + ".axes: expected an array");
    }
    for (size_t k = 0; k < axes.size(); ++k) {
      std::string actx = ctx + ".axes[" + std::to_string(k) + "]";
      const json& ax = axes[k];
      TabularAxis axis;
      axis.node = node_index(
          names, as_string(require(ax, "node", actx), actx + ".node"),
          actx + ".node");
      axis.lo = as_double(require(ax, "lo", actx), actx + ".lo");
      axis.hi = as_double(require(ax, "hi", actx), actx + ".hi");
      axis.cells = static_cast<int>(
          as_long(require(ax, "cells", actx), actx + ".cells"));
      fn.axes.push_back(axis);
    }
    const json& values = require(j, "values", ctx);
    if (!values.is_array()) {
      fail(ctx + ".values: expected an array");
    }
    for (size_t k = 0; k < values.size(); ++k) {
      fn.values.push_back(
          as_double(values[k], ctx + ".values[" + std::to_string(k) + "]"));
    }
    return fn;
  }
  fail(ctx + ".form: unknown equation form '" + form + "'");
}

Scm parse_scm(const json& j, const std::string& ctx) {
  const json& nodes = require(j, "nodes", ctx);
  if (!nodes.is_array() || nodes.empty()) {
    fail(ctx + ".nodes: expected a non-empty array");
  }
  std::vector<std::string> names;
  for (size_t k = 0; k < nodes.size(); ++k) {
    std::string nctx = ctx + ".nodes[" + std::to_string(k) + "]";
    names.push_back(
        as_string(require(nodes[k], "name", nctx), nctx + ".name"));
  }

  std::vector<Edge> edges;
  const json& edges_j = require(j, "edges", ctx);
  if (!edges_j.is_array()) {
    fail(ctx + ".edges: expected an array");
  }
  for (size_t k = 0; k < edges_j.size(); ++k) {
    std::string ectx = ctx + ".edges[" + std::to_string(k) + "]";
    const json& e = edges_j[k];
    if (!e.is_array() || e.size() != 2) {
      fail(ectx + ": expected a [parent, child] pair");
    }
    int parent = node_index(names, as_string(e[0], ectx + "[0]"), ectx);
    int child = node_index(names, as_string(e[1], ectx + "[1]"), ectx);
    edges.push_back({parent, child});
  }

  Scm scm;
  scm.dag = CausalDag(names, std::move(edges));
  for (size_t k = 0; k < nodes.size(); ++k) {
    std::string nctx = ctx + ".nodes[" + std::to_string(k) + "]";
    const json& n = nodes[k];
    scm.noises.push_back(parse_noise(require(n, "noise", nctx), nctx + ".noise"));
    scm.equations.push_back(
        parse_equation(require(n, "equation", nctx), names, nctx + ".equation"));
    std::string comp = opt_string(n, "composition", "additive", nctx);
    if (comp == "additive") {
      scm.composition.push_back(NoiseComposition::Additive);
    } else if (comp == "embedded") {
      scm.composition.push_back(NoiseComposition::Embedded);
    } else {
      fail(nctx + ".composition: expected 'additive' or 'embedded'");
    }
  }

  std::vector<Violation> violations = validate(scm);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    std::string where =
        v.node >= 0 ? " at node '" + names[static_cast<size_t>(v.node)] + "'"
                    : "";
    fail(ctx + ": invalid model" + where + ": " + v.message);
  }

  if (j.contains("support_bound")) {
    scm.support_bound =
        as_double(j.at("support_bound"), ctx + ".support_bound");
    if (!(scm.support_bound > 0.0)) {
      fail(ctx + ".support_bound: must be positive");
    }
  } else {
    scm.support_bound = estimate_support_bound(scm, 4096, kSupportProbeSeed);
  }
  return scm;
}

McConfig parse_mc(const json& j, const std::string& ctx) {
  McConfig mc;
  if (!j.is_object()) {
    return mc;
  }
  mc.n_outer = opt_long(j, "n_outer", mc.n_outer, ctx);
  mc.n_inner = opt_long(j, "n_inner", mc.n_inner, ctx);
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer() && !s.is_number_unsigned()) {
      fail(ctx + ".seed: expected an integer");
    }
    mc.seed = s.get<std::uint64_t>();
  }
  mc.alpha = opt_double(j, "alpha", mc.alpha, ctx);
  mc.threads = static_cast<int>(opt_long(j, "threads", mc.threads, ctx));
  mc.allow_analytic = opt_bool(j, "allow_analytic", mc.allow_analytic, ctx);
  if (mc.n_outer <= 0 || mc.n_inner <= 0) {
    fail(ctx + ": sample counts must be positive");
  }
  if (!(mc.alpha > 0.0 && mc.alpha < 1.0)) {
    fail(ctx + ".alpha: must lie in (0, 1)");
  }
  return mc;
}

std::shared_ptr<const Classifier> parse_classifier(
    const json& j, const std::vector<std::string>& names,
    const FeatureSpace& features, double support_bound,
    const std::string& ctx) {
  std::string type = as_string(require(j, "type", ctx), ctx + ".type");
  double bound = opt_double(j, "output_bound", 1e9, ctx);
  if (type == "linear") {
    const json& weights = require(j, "weights", ctx);
    if (!weights.is_array()) {
      fail(ctx + ".weights: expected an array");
    }
    std::vector<std::pair<int, double>> terms;
    for (size_t k = 0; k < weights.size(); ++k) {
      std::string wctx = ctx + ".weights[" + std::to_string(k) + "]";
      const json& w = weights[k];
      int node = node_index(names, as_string(require(w, "node", wctx),
                                             wctx + ".node"),
                            wctx + ".node");
      int pos = features.pos_of(node);
      if (pos < 0) {
        fail(wctx + ".node: node is not a feature");
      }
      terms.push_back(
          {pos, as_double(require(w, "weight", wctx), wctx + ".weight")});
    }
    return std::make_shared<LinearScoreClassifier>(
        features.dim(), std::move(terms), opt_double(j, "offset", 0.0, ctx),
        bound);
  }
  if (type == "constant") {
    return std::make_shared<ConstantClassifier>(
        features.dim(), as_double(require(j, "value", ctx), ctx + ".value"),
        bound);
  }
  (void)support_bound;
  fail(ctx + ".type: unknown classifier type '" + type + "'");
}

std::shared_ptr<const Cost> parse_cost(const json& j,
                                       const std::vector<std::string>& names,
                                       const FeatureSpace& features,
                                       const std::string& ctx) {
  std::string type = as_string(require(j, "type", ctx), ctx + ".type");
  if (type == "quadratic") {
    const json& rows = require(j, "matrix", ctx);
    if (!rows.is_array() || static_cast<int>(rows.size()) != features.dim()) {
      fail(ctx + ".matrix: expected " + std::to_string(features.dim()) +
           " rows");
    }
    std::vector<double> flat;
    for (size_t r = 0; r < rows.size(); ++r) {
      const json& row = rows[r];
      std::string rctx = ctx + ".matrix[" + std::to_string(r) + "]";
      if (!row.is_array() || row.size() != rows.size()) {
        fail(rctx + ": expected " + std::to_string(rows.size()) + " entries");
      }
      for (size_t c = 0; c < row.size(); ++c) {
        flat.push_back(
            as_double(row[c], rctx + "[" + std::to_string(c) + "]"));
      }
    }
    try {
      return std::make_shared<QuadraticCost>(std::move(flat), features.dim());
    } catch (const std::invalid_argument& e) {
      fail(ctx + ".matrix: " + e.what());
    }
  }
  if (type == "zero") {
    return std::make_shared<ZeroCost>(features.dim());
  }
  if (type == "gated") {
    int node = node_index(names, as_string(require(j, "axis", ctx),
                                           ctx + ".axis"),
                          ctx + ".axis");
    int pos = features.pos_of(node);
    if (pos < 0) {
      fail(ctx + ".axis: node is not a feature");
    }
    return std::make_shared<GatedCoordinateCost>(
        features.dim(), pos,
        as_double(require(j, "penalty", ctx), ctx + ".penalty"));
  }
  fail(ctx + ".type: unknown cost type '" + type + "'");
}

ActionSet parse_actions(const json& j, const std::vector<std::string>& names,
                        const FeatureSpace& features, const std::string& ctx) {
  std::string type = as_string(require(j, "type", ctx), ctx + ".type");
  if (type == "full_space") {
    return ActionSet::full_space(features.dim());
  }
  if (type == "coordinate_line") {
    int node = node_index(names, as_string(require(j, "axis", ctx),
                                           ctx + ".axis"),
                          ctx + ".axis");
    int pos = features.pos_of(node);
    if (pos < 0) {
      fail(ctx + ".axis: node is not a feature");
    }
    return ActionSet::coordinate_line(features.dim(), pos);
  }
  if (type == "finite_grid") {
    const json& actions = require(j, "actions", ctx);
    if (!actions.is_array() || actions.empty()) {
      fail(ctx + ".actions: expected a non-empty array");
    }
    std::vector<std::vector<double>> rows;
    for (size_t k = 0; k < actions.size(); ++k) {
      std::string actx = ctx + ".actions[" + std::to_string(k) + "]";
      const json& a = actions[k];
      if (!a.is_array()) {
        fail(actx + ": expected an array");
      }
      std::vector<double> row;
      for (size_t c = 0; c < a.size(); ++c) {
        row.push_back(as_double(a[c], actx + "[" + std::to_string(c) + "]"));
      }
      rows.push_back(std::move(row));
    }
    try {
      return ActionSet::finite_grid(std::move(rows));
    } catch (const std::invalid_argument& e) {
      fail(ctx + ".actions: " + e.what());
    }
  }
  fail(ctx + ".type: unknown action set type '" + type + "'");
}

Solver parse_solver(const json& j, const std::string& ctx) {
  std::string type = as_string(require(j, "type", ctx), ctx + ".type");
  if (type == "closed_form") {
    return ClosedFormSolver{};
  }
  if (type == "grid") {
    GridSolver g;
    g.resolution = opt_double(j, "resolution", g.resolution, ctx);
    g.radius = opt_double(j, "radius", g.radius, ctx);
    if (!(g.resolution > 0.0) || !(g.radius > 0.0)) {
      fail(ctx + ": resolution and radius must be positive");
    }
    return g;
  }
  fail(ctx + ".type: unknown solver type '" + type + "'");
}

ScenarioKind parse_kind(const std::string& kind, const std::string& ctx) {
  if (kind == "simulate") return ScenarioKind::Simulate;
  if (kind == "improvement") return ScenarioKind::Improvement;
  if (kind == "orient") return ScenarioKind::Orient;
  if (kind == "orient-cost") return ScenarioKind::OrientCost;
  if (kind == "sign-recovery") return ScenarioKind::SignRecovery;
  if (kind == "check-assumption") return ScenarioKind::CheckAssumption;
  fail(ctx + ": unknown experiment kind '" + kind + "'");
}

json parse_json_text(const std::string& text, const std::string& ctx) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    fail(ctx + ": malformed JSON");
  }
  return j;
}

}  // namespace

const char* scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Simulate:
      return "simulate";
    case ScenarioKind::Improvement:
      return "improvement";
    case ScenarioKind::Orient:
      return "orient";
    case ScenarioKind::OrientCost:
      return "orient-cost";
    case ScenarioKind::SignRecovery:
      return "sign-recovery";
    case ScenarioKind::CheckAssumption:
      return "check-assumption";
  }
  throw std::logic_error("scenario_kind_name: unknown kind");
}

std::uint64_t content_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Scenario parse_scenario(const std::string& json_text) {
  json j = parse_json_text(json_text, "scenario");

  Scenario s;
  s.source_hash = content_hash(json_text);
  s.id = as_string(require(j, "id", "scenario"), "scenario.id");
  s.kind = parse_kind(as_string(require(j, "kind", "scenario"),
                                "scenario.kind"),
                      "scenario.kind");
  s.scm = parse_scm(require(j, "scm", "scenario"), "scenario.scm");
  const std::vector<std::string>& names = s.scm.dag.names();

  if (j.contains("label")) {
    s.label = node_index(names, as_string(j.at("label"), "scenario.label"),
                         "scenario.label");
  } else if (s.kind != ScenarioKind::Simulate) {
    fail("scenario: missing field 'label'");
  }
  if (s.label >= 0) {
    s.features = FeatureSpace::all_except(s.scm, s.label);
  }

  s.mc = parse_mc(j.contains("mc") ? j.at("mc") : json(), "scenario.mc");
  s.eps = opt_double(j, "eps", s.eps, "scenario.eps");
  if (!(s.eps > 0.0 && s.eps < 1.0)) {
    fail("scenario.eps: must lie in (0, 1)");
  }

  if (s.kind == ScenarioKind::Improvement) {
    s.classifier = parse_classifier(require(j, "classifier", "scenario"),
                                    names, s.features, s.scm.support_bound,
                                    "scenario.classifier");
    s.cost = parse_cost(require(j, "cost", "scenario"), names, s.features,
                        "scenario.cost");
    s.actions = j.contains("actions")
                    ? parse_actions(j.at("actions"), names, s.features,
                                    "scenario.actions")
                    : ActionSet::full_space(s.features.dim());
    s.solver = j.contains("solver")
                   ? parse_solver(j.at("solver"), "scenario.solver")
                   : Solver{ClosedFormSolver{}};
  }

  const json grid_j = j.contains("grid") ? j.at("grid") : json();
  s.grid.n_candidates = static_cast<int>(
      opt_long(grid_j, "n_candidates", s.grid.n_candidates, "scenario.grid"));
  s.grid.mesh_size = static_cast<int>(
      opt_long(grid_j, "mesh_size", s.grid.mesh_size, "scenario.grid"));
  s.grid.cells_per_dim = static_cast<int>(opt_long(
      grid_j, "cells_per_dim", s.grid.cells_per_dim, "scenario.grid"));
  s.grid.margin_z =
      opt_double(grid_j, "margin_z", s.grid.margin_z, "scenario.grid");
  s.grid.mc = s.mc;

  const json probe_j = j.contains("probe") ? j.at("probe") : json();
  s.probe.n_x =
      static_cast<int>(opt_long(probe_j, "n_x", s.probe.n_x, "scenario.probe"));
  s.probe.n_alpha = static_cast<int>(
      opt_long(probe_j, "n_alpha", s.probe.n_alpha, "scenario.probe"));
  s.probe.margin_z =
      opt_double(probe_j, "margin_z", s.probe.margin_z, "scenario.probe");
  s.probe.mc = s.mc;

  s.sign_margin_z =
      opt_double(j, "sign_margin_z", s.sign_margin_z, "scenario.sign_margin_z");
  s.output = opt_string(j, "output", s.id + ".csv", "scenario.output");
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail("scenario: cannot open file '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

BenchConfig parse_bench_config(const std::string& json_text) {
  json j = parse_json_text(json_text, "bench");

  BenchConfig cfg;
  cfg.source_hash = content_hash(json_text);
  cfg.n_trials =
      static_cast<int>(opt_long(j, "n_trials", cfg.n_trials, "bench"));
  if (cfg.n_trials <= 0) {
    fail("bench.n_trials: must be positive");
  }
  if (j.contains("node_range")) {
    const json& r = j.at("node_range");
    if (!r.is_array() || r.size() != 2) {
      fail("bench.node_range: expected [lo, hi]");
    }
    cfg.node_lo = static_cast<int>(as_long(r[0], "bench.node_range[0]"));
    cfg.node_hi = static_cast<int>(as_long(r[1], "bench.node_range[1]"));
  }
  if (cfg.node_lo < 2 || cfg.node_hi < cfg.node_lo) {
    fail("bench.node_range: need 2 <= lo <= hi");
  }
  if (j.contains("weight_range")) {
    const json& r = j.at("weight_range");
    if (!r.is_array() || r.size() != 2) {
      fail("bench.weight_range: expected [lo, hi]");
    }
    cfg.weight_lo = as_double(r[0], "bench.weight_range[0]");
    cfg.weight_hi = as_double(r[1], "bench.weight_range[1]");
  }
  if (!(cfg.weight_lo > 0.0) || cfg.weight_hi < cfg.weight_lo) {
    fail("bench.weight_range: need 0 < lo <= hi");
  }
  cfg.edge_probability =
      opt_double(j, "edge_probability", cfg.edge_probability, "bench");
  if (!(cfg.edge_probability >= 0.0 && cfg.edge_probability <= 1.0)) {
    fail("bench.edge_probability: must lie in [0, 1]");
  }
  cfg.eps = opt_double(j, "eps", cfg.eps, "bench");
  if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) {
    fail("bench.eps: must lie in (0, 1)");
  }

  cfg.mc = parse_mc(j.contains("mc") ? j.at("mc") : json(), "bench.mc");
  if (j.contains("seed")) {
    const json& seed = j.at("seed");
    if (!seed.is_number_integer() && !seed.is_number_unsigned()) {
      fail("bench.seed: expected an integer");
    }
    cfg.mc.seed = seed.get<std::uint64_t>();
  }

  const json grid_j = j.contains("grid") ? j.at("grid") : json();
  cfg.grid.n_candidates = static_cast<int>(
      opt_long(grid_j, "n_candidates", cfg.grid.n_candidates, "bench.grid"));
  cfg.grid.mesh_size = static_cast<int>(
      opt_long(grid_j, "mesh_size", cfg.grid.mesh_size, "bench.grid"));
  cfg.grid.cells_per_dim = static_cast<int>(opt_long(
      grid_j, "cells_per_dim", cfg.grid.cells_per_dim, "bench.grid"));
  cfg.grid.margin_z =
      opt_double(grid_j, "margin_z", cfg.grid.margin_z, "bench.grid");
  cfg.grid.mc = cfg.mc;

  const json probe_j = j.contains("probe") ? j.at("probe") : json();
  cfg.probe.n_x =
      static_cast<int>(opt_long(probe_j, "n_x", cfg.probe.n_x, "bench.probe"));
  cfg.probe.n_alpha = static_cast<int>(
      opt_long(probe_j, "n_alpha", cfg.probe.n_alpha, "bench.probe"));
  cfg.probe.margin_z =
      opt_double(probe_j, "margin_z", cfg.probe.margin_z, "bench.probe");
  cfg.probe.mc = cfg.mc;

  cfg.output = opt_string(j, "output", cfg.output, "bench.output");
  return cfg;
}

BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail("bench: cannot open file '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_bench_config(text.str());
}

}  // namespace strategem
