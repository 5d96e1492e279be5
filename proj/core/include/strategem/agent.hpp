#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "strategem/scm.hpp"

namespace strategem {

// ---------------------------------------------------------------------------
// Feature space
//
// Classifiers, costs and actions all operate on feature vectors. A
// FeatureSpace names which model nodes the coordinates refer to, in
// ascending node-index order.
struct FeatureSpace {
  std::vector<int> nodes;

  static FeatureSpace all_except(const Scm& scm, int label);

  int dim() const { return static_cast<int>(nodes.size()); }
  int node_at(int pos) const { return nodes[static_cast<size_t>(pos)]; }
  // Position of a node in the feature vector, -1 if absent.
  int pos_of(int node) const;
  std::vector<double> project(const Assignment& full) const;
};

// ---------------------------------------------------------------------------
// Action sets

struct ActionSet {
  enum class Kind { FullSpace, CoordinateLine, FiniteGrid };

  Kind kind = Kind::FullSpace;
  int dim = 0;
  int axis = -1;  // CoordinateLine only
  std::vector<std::vector<double>> actions;  // FiniteGrid only, must contain 0

  static ActionSet full_space(int dim);
  static ActionSet coordinate_line(int dim, int axis);
  static ActionSet finite_grid(std::vector<std::vector<double>> actions);
};

// ---------------------------------------------------------------------------
// Costs

enum class CostKind { Quadratic, GatedCoordinate, TabularOutcome, Zero, Custom };

class Cost {
 public:
  virtual ~Cost() = default;
  virtual double operator()(std::span<const double> action,
                            std::span<const double> x) const = 0;
  virtual CostKind kind() const = 0;
  virtual int dim() const = 0;
};

// c(a; x) = a' C a / 2 with C symmetric positive definite (checked at
// construction; all eigenvalues must exceed zero).
class QuadraticCost : public Cost {
 public:
  QuadraticCost(std::vector<double> matrix_row_major, int dim);

  double operator()(std::span<const double> action,
                    std::span<const double> x) const override;
  CostKind kind() const override { return CostKind::Quadratic; }
  int dim() const override { return dim_; }

  double entry(int i, int j) const {
    return matrix_[static_cast<size_t>(i * dim_ + j)];
  }
  const std::vector<double>& matrix() const { return matrix_; }
  // Solves C y = w.
  std::vector<double> solve(std::span<const double> w) const;

 private:
  std::vector<double> matrix_;
  int dim_;
};

// Free along one axis, prohibitively expensive (2B) anywhere else.
class GatedCoordinateCost : public Cost {
 public:
  GatedCoordinateCost(int dim, int axis, double penalty);

  double operator()(std::span<const double> action,
                    std::span<const double> x) const override;
  CostKind kind() const override { return CostKind::GatedCoordinate; }
  int dim() const override { return dim_; }
  int axis() const { return axis_; }
  double penalty() const { return penalty_; }

 private:
  int dim_;
  int axis_;
  double penalty_;
};

class ZeroCost : public Cost {
 public:
  explicit ZeroCost(int dim) : dim_(dim) {}
  double operator()(std::span<const double> action,
                    std::span<const double> x) const override;
  CostKind kind() const override { return CostKind::Zero; }
  int dim() const override { return dim_; }

 private:
  int dim_;
};

// Explicit table: cost of each listed action within each x-cell. The action
// must match a listed action exactly; x outside the grid is a domain error.
class TabularOutcomeCost : public Cost {
 public:
  struct Axis {
    int pos = 0;  // feature coordinate
    double lo = 0.0;
    double hi = 1.0;
    int cells = 1;
  };

  TabularOutcomeCost(int dim, std::vector<Axis> axes,
                     std::vector<std::vector<double>> actions,
                     std::vector<double> costs_cell_major);

  double operator()(std::span<const double> action,
                    std::span<const double> x) const override;
  CostKind kind() const override { return CostKind::TabularOutcome; }
  int dim() const override { return dim_; }

  const std::vector<Axis>& axes() const { return axes_; }
  const std::vector<std::vector<double>>& actions() const { return actions_; }
  const std::vector<double>& costs() const { return costs_; }

 private:
  int dim_;
  std::vector<Axis> axes_;
  std::vector<std::vector<double>> actions_;
  std::vector<double> costs_;  // cell-major, then action index
};

// ---------------------------------------------------------------------------
// Classifiers
//
// Published scores are clamped to [0, output_bound].

enum class ClassifierKind { LinearScore, IndicatorMatch, Constant, GridFunction };

class Classifier {
 public:
  Classifier(int dim, double output_bound)
      : dim_(dim), output_bound_(output_bound) {}
  virtual ~Classifier() = default;

  double score(std::span<const double> features) const;
  virtual ClassifierKind kind() const = 0;
  int dim() const { return dim_; }
  double output_bound() const { return output_bound_; }

 protected:
  virtual double raw_score(std::span<const double> features) const = 0;

 private:
  int dim_;
  double output_bound_;
};

class LinearScoreClassifier : public Classifier {
 public:
  LinearScoreClassifier(int dim, std::vector<std::pair<int, double>> weights,
                        double offset, double output_bound);

  ClassifierKind kind() const override { return ClassifierKind::LinearScore; }
  const std::vector<std::pair<int, double>>& weights() const {
    return weights_;
  }
  double offset() const { return offset_; }
  // Dense gradient of the raw score.
  std::vector<double> gradient() const;

 protected:
  double raw_score(std::span<const double> features) const override;

 private:
  std::vector<std::pair<int, double>> weights_;  // (feature pos, weight)
  double offset_;
};

class ConstantClassifier : public Classifier {
 public:
  ConstantClassifier(int dim, double value, double output_bound)
      : Classifier(dim, output_bound), value_(value) {}
  ClassifierKind kind() const override { return ClassifierKind::Constant; }
  double value() const { return value_; }

 protected:
  double raw_score(std::span<const double>) const override { return value_; }

 private:
  double value_;
};

// f(x) = 1 when |x[target] - h(x)| <= tolerance, else 0. The reference
// function must read only copy coordinates (never x[target] itself) so that
// moving the target coordinate cannot move the reference point.
class IndicatorMatchClassifier : public Classifier {
 public:
  using ReferenceFn = std::function<double(std::span<const double>)>;

  IndicatorMatchClassifier(int dim, int target_axis, ReferenceFn reference,
                           double tolerance, double output_bound);

  ClassifierKind kind() const override {
    return ClassifierKind::IndicatorMatch;
  }
  int target_axis() const { return target_axis_; }
  double tolerance() const { return tolerance_; }
  double reference(std::span<const double> features) const {
    return reference_(features);
  }

 protected:
  double raw_score(std::span<const double> features) const override;

 private:
  int target_axis_;
  ReferenceFn reference_;
  double tolerance_;
};

// Piecewise-constant score over a feature grid.
class GridFunctionClassifier : public Classifier {
 public:
  struct Axis {
    int pos = 0;
    double lo = 0.0;
    double hi = 1.0;
    int cells = 1;
  };

  GridFunctionClassifier(int dim, std::vector<Axis> axes,
                         std::vector<double> values, double output_bound);

  ClassifierKind kind() const override {
    return ClassifierKind::GridFunction;
  }
  const std::vector<Axis>& axes() const { return axes_; }
  const std::vector<double>& values() const { return values_; }

 protected:
  double raw_score(std::span<const double> features) const override;

 private:
  std::vector<Axis> axes_;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Best response

struct ClosedFormSolver {};

struct GridSolver {
  double resolution = 0.1;
  double radius = 1.0;
};

using Solver = std::variant<ClosedFormSolver, GridSolver>;

enum class SolverTag { ClosedForm, Grid };

struct BestResponse {
  std::vector<double> action;   // a*
  std::vector<double> adapted;  // x + a*
  double utility = 0.0;
  SolverTag solver_tag = SolverTag::ClosedForm;
};

// f(x + a) - c(a; x). Throws DimensionMismatchError on shape errors.
double utility(const Classifier& f, const Cost& c, std::span<const double> x,
               std::span<const double> action);

// Maximizes utility over the action set. ClosedForm handles
// (LinearScore, Quadratic, FullSpace) via a* = C^{ -1 } grad (exact for the
// unclamped score; returned as-is even where clamping binds) and
// (IndicatorMatch, GatedCoordinate) via the single-axis match move; any
// other combination raises SolverMismatchError. Grid enumerates a centered
// hypercube (zero action always included) and breaks utility ties toward
// the smaller l2 norm, then lexicographically, so a grid response is never
// worse than the zero action.
BestResponse best_response(const Classifier& f, const Cost& c,
                           std::span<const double> x, const ActionSet& actions,
                           const Solver& solver);

// utility(a) >= eps * oracle_max with eps in (0, 1).
bool is_epsilon_best_response(const Classifier& f, const Cost& c,
                              std::span<const double> x,
                              std::span<const double> action, double eps,
                              double oracle_max);

}  // namespace strategem
