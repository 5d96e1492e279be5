#include "strategem/agent.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "strategem/errors.hpp"

namespace strategem {

namespace {

void check_dim(size_t got, int want, const char* what) {
  if (got != static_cast<size_t>(want)) {
    std::ostringstream msg;
    msg << what << " has dimension " << got << ", expected " << want;
    throw DimensionMismatchError(msg.str());
  }
}

double l2_sq(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) {
    acc += x * x;
  }
  return acc;
}

bool lex_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

// ---------------------------------------------------------------------------
// FeatureSpace

FeatureSpace FeatureSpace::all_except(const Scm& scm, int label) {
  if (label < 0 || label >= scm.node_count()) {
    throw UnknownNodeError("label node index out of range");
  }
  FeatureSpace fs;
  for (int i = 0; i < scm.node_count(); ++i) {
    if (i != label) {
      fs.nodes.push_back(i);
    }
  }
  return fs;
}

int FeatureSpace::pos_of(int node) const {
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] == node) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

std::vector<double> FeatureSpace::project(const Assignment& full) const {
  std::vector<double> out(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) {
    out[i] = full[static_cast<size_t>(nodes[i])];
  }
  return out;
}

// ---------------------------------------------------------------------------
// ActionSet

ActionSet ActionSet::full_space(int dim) {
  ActionSet s;
  s.kind = Kind::FullSpace;
  s.dim = dim;
  return s;
}

ActionSet ActionSet::coordinate_line(int dim, int axis) {
  if (axis < 0 || axis >= dim) {
    throw DimensionMismatchError("coordinate line axis out of range");
  }
  ActionSet s;
  s.kind = Kind::CoordinateLine;
  s.dim = dim;
  s.axis = axis;
  return s;
}

ActionSet ActionSet::finite_grid(std::vector<std::vector<double>> actions) {
  if (actions.empty()) {
    throw DimensionMismatchError("finite grid needs at least one action");
  }
  ActionSet s;
  s.kind = Kind::FiniteGrid;
  s.dim = static_cast<int>(actions.front().size());
  bool has_zero = false;
  for (const auto& a : actions) {
    if (a.size() != actions.front().size()) {
      throw DimensionMismatchError("finite grid actions differ in dimension");
    }
    if (std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; })) {
      has_zero = true;
    }
  }
  if (!has_zero) {
    throw DimensionMismatchError("finite grid must include the zero action");
  }
  s.actions = std::move(actions);
  return s;
}

// ---------------------------------------------------------------------------
// Costs

QuadraticCost::QuadraticCost(std::vector<double> matrix_row_major, int dim)
    : matrix_(std::move(matrix_row_major)), dim_(dim) {
  if (dim < 1 || matrix_.size() != static_cast<size_t>(dim * dim)) {
    throw DimensionMismatchError("quadratic cost matrix must be dim x dim");
  }
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      if (entry(i, j) != entry(j, i)) {
        throw std::invalid_argument("quadratic cost matrix must be symmetric");
      }
    }
  }
  Eigen::MatrixXd m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      m(i, j) = entry(i, j);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument(
        "quadratic cost matrix must be positive definite");
  }
}

double QuadraticCost::operator()(std::span<const double> action,
                                 std::span<const double> x) const {
  (void)x;
  check_dim(action.size(), dim_, "action");
  double acc = 0.0;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      acc += action[static_cast<size_t>(i)] * entry(i, j) *
             action[static_cast<size_t>(j)];
    }
  }
  return 0.5 * acc;
}

std::vector<double> QuadraticCost::solve(std::span<const double> w) const {
  check_dim(w.size(), dim_, "gradient");
  if (dim_ == 1) {
    return {w[0] / entry(0, 0)};
  }
  if (dim_ == 2) {
    // Adjugate form keeps 2x2 solves bit-stable across platforms.
    double det = entry(0, 0) * entry(1, 1) - entry(0, 1) * entry(1, 0);
    double inv_det = 1.0 / det;
    return {inv_det * (entry(1, 1) * w[0] - entry(0, 1) * w[1]),
            inv_det * (entry(0, 0) * w[1] - entry(1, 0) * w[0])};
  }
  Eigen::MatrixXd m(dim_, dim_);
  Eigen::VectorXd rhs(dim_);
  for (int i = 0; i < dim_; ++i) {
    rhs(i) = w[static_cast<size_t>(i)];
    for (int j = 0; j < dim_; ++j) {
      m(i, j) = entry(i, j);
    }
  }
  Eigen::VectorXd sol = m.ldlt().solve(rhs);
  std::vector<double> out(static_cast<size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    out[static_cast<size_t>(i)] = sol(i);
  }
  return out;
}

GatedCoordinateCost::GatedCoordinateCost(int dim, int axis, double penalty)
    : dim_(dim), axis_(axis), penalty_(penalty) {
  if (axis < 0 || axis >= dim) {
    throw DimensionMismatchError("gated coordinate axis out of range");
  }
}

double GatedCoordinateCost::operator()(std::span<const double> action,
                                       std::span<const double> x) const {
  (void)x;
  check_dim(action.size(), dim_, "action");
  for (int i = 0; i < dim_; ++i) {
    if (i != axis_ && action[static_cast<size_t>(i)] != 0.0) {
      return penalty_;
    }
  }
  return 0.0;
}

double ZeroCost::operator()(std::span<const double> action,
                            std::span<const double> x) const {
  (void)x;
  check_dim(action.size(), dim_, "action");
  return 0.0;
}

TabularOutcomeCost::TabularOutcomeCost(
    int dim, std::vector<Axis> axes, std::vector<std::vector<double>> actions,
    std::vector<double> costs_cell_major)
    : dim_(dim),
      axes_(std::move(axes)),
      actions_(std::move(actions)),
      costs_(std::move(costs_cell_major)) {
  size_t cells = 1;
  for (const Axis& ax : axes_) {
    if (ax.pos < 0 || ax.pos >= dim_ || !(ax.lo < ax.hi) || ax.cells < 1) {
      throw std::invalid_argument("tabular cost axis malformed");
    }
    cells *= static_cast<size_t>(ax.cells);
  }
  if (actions_.empty() || costs_.size() != cells * actions_.size()) {
    throw std::invalid_argument(
        "tabular cost needs one entry per (cell, action)");
  }
}

double TabularOutcomeCost::operator()(std::span<const double> action,
                                      std::span<const double> x) const {
  check_dim(action.size(), dim_, "action");
  check_dim(x.size(), dim_, "feature vector");
  size_t cell = 0;
  for (const Axis& ax : axes_) {
    double v = x[static_cast<size_t>(ax.pos)];
    if (!(v >= ax.lo && v <= ax.hi)) {
      throw EvaluationDomainError("tabular cost probed outside its x grid");
    }
    double step = (ax.hi - ax.lo) / ax.cells;
    int idx = static_cast<int>((v - ax.lo) / step);
    if (idx >= ax.cells) {
      idx = ax.cells - 1;
    }
    cell = cell * static_cast<size_t>(ax.cells) + static_cast<size_t>(idx);
  }
  for (size_t k = 0; k < actions_.size(); ++k) {
    bool match = true;
    for (int i = 0; i < dim_; ++i) {
      if (actions_[k][static_cast<size_t>(i)] !=
          action[static_cast<size_t>(i)]) {
        match = false;
        break;
      }
    }
    if (match) {
      return costs_[cell * actions_.size() + k];
    }
  }
  throw EvaluationDomainError("action is not listed in the tabular cost");
}

// ---------------------------------------------------------------------------
// Classifiers

double Classifier::score(std::span<const double> features) const {
  check_dim(features.size(), dim_, "feature vector");
  double raw = raw_score(features);
  return std::clamp(raw, 0.0, output_bound_);
}

LinearScoreClassifier::LinearScoreClassifier(
    int dim, std::vector<std::pair<int, double>> weights, double offset,
    double output_bound)
    : Classifier(dim, output_bound),
      weights_(std::move(weights)),
      offset_(offset) {
  for (const auto& [pos, w] : weights_) {
    (void)w;
    if (pos < 0 || pos >= dim) {
      throw DimensionMismatchError("linear score weight position out of range");
    }
  }
}

double LinearScoreClassifier::raw_score(
    std::span<const double> features) const {
  double acc = offset_;
  for (const auto& [pos, w] : weights_) {
    acc += w * features[static_cast<size_t>(pos)];
  }
  return acc;
}

std::vector<double> LinearScoreClassifier::gradient() const {
  std::vector<double> g(static_cast<size_t>(dim()), 0.0);
  for (const auto& [pos, w] : weights_) {
    g[static_cast<size_t>(pos)] += w;
  }
  return g;
}

IndicatorMatchClassifier::IndicatorMatchClassifier(int dim, int target_axis,
                                                   ReferenceFn reference,
                                                   double tolerance,
                                                   double output_bound)
    : Classifier(dim, output_bound),
      target_axis_(target_axis),
      reference_(std::move(reference)),
      tolerance_(tolerance) {
  if (target_axis < 0 || target_axis >= dim) {
    throw DimensionMismatchError("indicator target axis out of range");
  }
  if (!reference_) {
    throw std::invalid_argument("indicator match needs a reference function");
  }
}

double IndicatorMatchClassifier::raw_score(
    std::span<const double> features) const {
  double ref = reference_(features);
  return std::fabs(features[static_cast<size_t>(target_axis_)] - ref) <=
                 tolerance_
             ? 1.0
             : 0.0;
}

GridFunctionClassifier::GridFunctionClassifier(int dim, std::vector<Axis> axes,
                                               std::vector<double> values,
                                               double output_bound)
    : Classifier(dim, output_bound),
      axes_(std::move(axes)),
      values_(std::move(values)) {
  size_t cells = 1;
  for (const Axis& ax : axes_) {
    if (ax.pos < 0 || ax.pos >= dim || !(ax.lo < ax.hi) || ax.cells < 1) {
      throw std::invalid_argument("grid classifier axis malformed");
    }
    cells *= static_cast<size_t>(ax.cells);
  }
  if (values_.size() != cells) {
    throw std::invalid_argument("grid classifier needs one value per cell");
  }
}

double GridFunctionClassifier::raw_score(
    std::span<const double> features) const {
  size_t cell = 0;
  for (const Axis& ax : axes_) {
    double v = features[static_cast<size_t>(ax.pos)];
    if (!(v >= ax.lo && v <= ax.hi)) {
      throw EvaluationDomainError(
          "grid classifier probed outside its feature grid");
    }
    double step = (ax.hi - ax.lo) / ax.cells;
    int idx = static_cast<int>((v - ax.lo) / step);
    if (idx >= ax.cells) {
      idx = ax.cells - 1;
    }
    cell = cell * static_cast<size_t>(ax.cells) + static_cast<size_t>(idx);
  }
  return values_[cell];
}

// ---------------------------------------------------------------------------
// Best response

double utility(const Classifier& f, const Cost& c, std::span<const double> x,
               std::span<const double> action) {
  check_dim(x.size(), f.dim(), "feature vector");
  check_dim(action.size(), f.dim(), "action");
  if (c.dim() != f.dim()) {
    throw DimensionMismatchError("cost and classifier dimensions differ");
  }
  std::vector<double> moved(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    moved[i] = x[i] + action[i];
  }
  return f.score(moved) - c(action, x);
}

namespace {

BestResponse finish_response(const Classifier& f, const Cost& c,
                             std::span<const double> x,
                             std::vector<double> action, SolverTag tag) {
  // Never return anything worse than standing still.
  std::vector<double> zero(x.size(), 0.0);
  double u_action = utility(f, c, x, action);
  double u_zero = utility(f, c, x, zero);
  bool keep_action = u_action > u_zero;
  if (u_action == u_zero) {
    keep_action = l2_sq(action) < l2_sq(zero) ? true : false;
  }
  BestResponse br;
  br.solver_tag = tag;
  br.action = keep_action ? std::move(action) : std::move(zero);
  br.utility = keep_action ? u_action : u_zero;
  br.adapted.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    br.adapted[i] = x[i] + br.action[i];
  }
  return br;
}

BestResponse closed_form_response(const Classifier& f, const Cost& c,
                                  std::span<const double> x,
                                  const ActionSet& actions) {
  if (f.kind() == ClassifierKind::LinearScore &&
      c.kind() == CostKind::Quadratic &&
      actions.kind == ActionSet::Kind::FullSpace) {
    const auto& lin = static_cast<const LinearScoreClassifier&>(f);
    const auto& quad = static_cast<const QuadraticCost&>(c);
    // Exact maximizer of the unclamped program w'(x+a) - a'Ca/2. It is
    // returned as-is; when score clamping binds, the grid solver is the
    // honest argmax of the published utility.
    BestResponse br;
    br.solver_tag = SolverTag::ClosedForm;
    br.action = quad.solve(lin.gradient());
    br.adapted.resize(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
      br.adapted[i] = x[i] + br.action[i];
    }
    br.utility = utility(f, c, x, br.action);
    return br;
  }
  if (f.kind() == ClassifierKind::IndicatorMatch &&
      c.kind() == CostKind::GatedCoordinate) {
    const auto& ind = static_cast<const IndicatorMatchClassifier&>(f);
    const auto& gate = static_cast<const GatedCoordinateCost&>(c);
    if (ind.target_axis() != gate.axis()) {
      throw SolverMismatchError(
          "indicator target axis differs from the gated axis");
    }
    if (actions.kind == ActionSet::Kind::CoordinateLine &&
        actions.axis != gate.axis()) {
      throw SolverMismatchError(
          "coordinate line does not cover the gated axis");
    }
    if (actions.kind == ActionSet::Kind::FiniteGrid) {
      throw SolverMismatchError(
          "closed form does not enumerate finite grids; use the grid solver");
    }
    // The reference point ignores the target coordinate, so moving straight
    // to it is a fixed point of the adaptation.
    std::vector<double> a(x.size(), 0.0);
    double ref = ind.reference(x);
    a[static_cast<size_t>(ind.target_axis())] =
        ref - x[static_cast<size_t>(ind.target_axis())];
    return finish_response(f, c, x, std::move(a), SolverTag::ClosedForm);
  }
  if (f.kind() == ClassifierKind::Constant) {
    // A flat score makes every move pure cost, so staying put is optimal
    // regardless of the cost model or action set.
    return finish_response(f, c, x, std::vector<double>(x.size(), 0.0),
                           SolverTag::ClosedForm);
  }
  throw SolverMismatchError(
      "closed form requires (linear score, quadratic, full space), "
      "(indicator match, gated coordinate), or a constant score");
}

BestResponse grid_response(const Classifier& f, const Cost& c,
                           std::span<const double> x, const ActionSet& actions,
                           const GridSolver& grid) {
  if (!(grid.resolution > 0.0) || !(grid.radius >= 0.0)) {
    throw SolverMismatchError("grid solver needs resolution > 0, radius >= 0");
  }
  int d = static_cast<int>(x.size());
  std::vector<double> best(static_cast<size_t>(d), 0.0);
  double best_u = utility(f, c, x, best);

  auto consider = [&](const std::vector<double>& a) {
    double u = utility(f, c, x, a);
    if (u > best_u) {
      best_u = u;
      best = a;
      return;
    }
    if (u == best_u) {
      double na = l2_sq(a);
      double nb = l2_sq(best);
      if (na < nb || (na == nb && lex_less(a, best))) {
        best = a;
      }
    }
  };

  long steps = static_cast<long>(grid.radius / grid.resolution + 1e-9);
  switch (actions.kind) {
    case ActionSet::Kind::FiniteGrid: {
      for (const auto& a : actions.actions) {
        check_dim(a.size(), d, "finite grid action");
        consider(a);
      }
      break;
    }
    case ActionSet::Kind::CoordinateLine: {
      std::vector<double> a(static_cast<size_t>(d), 0.0);
      for (long k = -steps; k <= steps; ++k) {
        a[static_cast<size_t>(actions.axis)] =
            static_cast<double>(k) * grid.resolution;
        consider(a);
      }
      break;
    }
    case ActionSet::Kind::FullSpace: {
      long per_axis = 2 * steps + 1;
      double total = 1.0;
      for (int i = 0; i < d; ++i) {
        total *= static_cast<double>(per_axis);
      }
      if (total > 4e6) {
        throw SolverMismatchError(
            "grid solver lattice too large; coarsen resolution or radius");
      }
      std::vector<long> idx(static_cast<size_t>(d), -steps);
      std::vector<double> a(static_cast<size_t>(d), 0.0);
      bool done = false;
      while (!done) {
        for (int i = 0; i < d; ++i) {
          a[static_cast<size_t>(i)] =
              static_cast<double>(idx[static_cast<size_t>(i)]) *
              grid.resolution;
        }
        consider(a);
        int pos = d - 1;
        while (pos >= 0) {
          if (++idx[static_cast<size_t>(pos)] <= steps) {
            break;
          }
          idx[static_cast<size_t>(pos)] = -steps;
          --pos;
        }
        done = pos < 0;
      }
      break;
    }
  }

  BestResponse br;
  br.solver_tag = SolverTag::Grid;
  br.action = std::move(best);
  br.utility = best_u;
  br.adapted.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    br.adapted[i] = x[i] + br.action[i];
  }
  return br;
}

}  // namespace

BestResponse best_response(const Classifier& f, const Cost& c,
                           std::span<const double> x, const ActionSet& actions,
                           const Solver& solver) {
  check_dim(x.size(), f.dim(), "feature vector");
  if (actions.dim != f.dim()) {
    throw DimensionMismatchError("action set and classifier dimensions differ");
  }
  if (std::holds_alternative<ClosedFormSolver>(solver)) {
    return closed_form_response(f, c, x, actions);
  }
  return grid_response(f, c, x, actions, std::get<GridSolver>(solver));
}

bool is_epsilon_best_response(const Classifier& f, const Cost& c,
                              std::span<const double> x,
                              std::span<const double> action, double eps,
                              double oracle_max) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("eps must lie in (0, 1)");
  }
  return utility(f, c, x, action) >= eps * oracle_max;
}

}  // namespace strategem
