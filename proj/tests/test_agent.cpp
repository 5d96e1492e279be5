#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "strategem/agent.hpp"
#include "strategem/errors.hpp"

using namespace strategem;

namespace {

// Off-diagonal interaction with determinant exactly one.
QuadraticCost unit_det_cost() {
  return QuadraticCost({2.0, -0.5, -0.5, 0.625}, 2);
}

}  // namespace

TEST_CASE("feature spaces drop the label and project assignments") {
  Scm scm = testutil::two_feature_model();
  FeatureSpace fs = FeatureSpace::all_except(scm, 2);
  CHECK(fs.dim() == 2);
  CHECK(fs.node_at(0) == 0);
  CHECK(fs.node_at(1) == 1);
  CHECK(fs.pos_of(1) == 1);
  CHECK(fs.pos_of(2) == -1);
  Assignment v{7.0, 8.0, 9.0};
  CHECK(fs.project(v) == std::vector<double>{7.0, 8.0});
}

TEST_CASE("quadratic cost value and gradient solve") {
  QuadraticCost c = unit_det_cost();
  CHECK(c.entry(0, 1) == -0.5);
  std::vector<double> a{0.5, 2.0};
  std::vector<double> x{0.0, 0.0};
  // a' C a / 2 with C a = (0, 1).
  CHECK(c(a, x) == 1.0);

  std::vector<double> ez{0.0, 1.0};
  CHECK(c.solve(ez) == std::vector<double>{0.5, 2.0});

  std::vector<double> ex{1.0, 0.0};
  CHECK(c.solve(ex) == std::vector<double>{0.625, 0.5});

  CHECK_THROWS_AS(QuadraticCost({1.0, 2.0, 2.0, 1.0}, 2),
                  std::invalid_argument);  // indefinite
  CHECK_THROWS_AS(QuadraticCost({1.0, 0.0, 0.0}, 2), DimensionMismatchError);
}

TEST_CASE("classifier scores clamp to the output range") {
  LinearScoreClassifier f(2, {{0, 1.0}}, -0.5, 1.0);
  std::vector<double> low{0.2, 0.0};
  std::vector<double> mid{1.2, 0.0};
  std::vector<double> high{9.0, 0.0};
  CHECK(f.score(low) == 0.0);
  CHECK(f.score(mid) == doctest::Approx(0.7));
  CHECK(f.score(high) == 1.0);
  CHECK(f.gradient() == std::vector<double>{1.0, 0.0});

  ConstantClassifier g(2, 0.25, 1.0);
  CHECK(g.score(high) == 0.25);
}

TEST_CASE("utility is score minus cost") {
  LinearScoreClassifier f(2, {{0, 1.0}, {1, 2.0}}, 0.0, 100.0);
  ZeroCost zero(2);
  std::vector<double> x{1.0, 1.0};
  std::vector<double> a{0.5, 0.0};
  CHECK(utility(f, zero, x, a) == doctest::Approx(3.5));
  QuadraticCost c({1.0, 0.0, 0.0, 1.0}, 2);
  CHECK(utility(f, c, x, a) == doctest::Approx(3.5 - 0.125));
}

TEST_CASE("closed form solves the quadratic program exactly") {
  LinearScoreClassifier f(2, {{1, 1.0}}, 0.0, 1e9);
  QuadraticCost c = unit_det_cost();
  std::vector<double> x{0.3, -1.2};
  BestResponse br = best_response(f, c, x, ActionSet::full_space(2),
                                  ClosedFormSolver{});
  CHECK(br.solver_tag == SolverTag::ClosedForm);
  CHECK(br.action == std::vector<double>{0.5, 2.0});
  CHECK(br.adapted[0] == 0.3 + 0.5);
  CHECK(br.adapted[1] == -1.2 + 2.0);
  // The formula ignores the zero-action comparison by design: it is the
  // stationary point of the unclamped program.
  CHECK(br.utility == doctest::Approx(f.score(br.adapted) - 1.0));
}

TEST_CASE("grid and closed form agree within one lattice step") {
  LinearScoreClassifier f(2, {{0, 1.0}, {1, 0.5}}, 5.0, 1e9);
  QuadraticCost c({1.0, 0.0, 0.0, 1.0}, 2);
  std::vector<double> x{0.1, -0.2};
  BestResponse exact = best_response(f, c, x, ActionSet::full_space(2),
                                     ClosedFormSolver{});
  GridSolver grid;
  grid.resolution = 0.1;
  grid.radius = 2.0;
  BestResponse approx = best_response(f, c, x, ActionSet::full_space(2), grid);
  CHECK(approx.solver_tag == SolverTag::Grid);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::fabs(approx.action[static_cast<size_t>(i)] -
                    exact.action[static_cast<size_t>(i)]) <=
          grid.resolution + 1e-12);
  }
}

TEST_CASE("indicator plus gated coordinate has a one-step closed form") {
  auto ref = [](std::span<const double>) { return 1.5; };
  IndicatorMatchClassifier f(2, 0, ref, 0.05, 1.0);
  GatedCoordinateCost c(2, 0, 10.0);

  std::vector<double> far{0.2, 7.0};
  BestResponse br = best_response(f, c, far, ActionSet::full_space(2),
                                  ClosedFormSolver{});
  CHECK(br.action[0] == doctest::Approx(1.3));
  CHECK(br.action[1] == 0.0);
  CHECK(br.utility == 1.0);

  // Already matching: stands still on the tie.
  std::vector<double> close{1.52, 7.0};
  BestResponse stay = best_response(f, c, close, ActionSet::full_space(2),
                                    ClosedFormSolver{});
  CHECK(stay.action == std::vector<double>{0.0, 0.0});
  CHECK(stay.utility == 1.0);
}

TEST_CASE("solver and problem shapes must match") {
  LinearScoreClassifier lin(2, {{0, 1.0}}, 0.0, 1.0);
  ZeroCost zero(2);
  std::vector<double> x{0.0, 0.0};
  CHECK_THROWS_AS(best_response(lin, zero, x, ActionSet::full_space(2),
                                ClosedFormSolver{}),
                  SolverMismatchError);

  auto ref = [](std::span<const double>) { return 0.0; };
  IndicatorMatchClassifier ind(2, 0, ref, 0.1, 1.0);
  GatedCoordinateCost off_axis(2, 1, 5.0);
  CHECK_THROWS_AS(best_response(ind, off_axis, x, ActionSet::full_space(2),
                                ClosedFormSolver{}),
                  SolverMismatchError);

  GatedCoordinateCost gate(2, 0, 5.0);
  CHECK_THROWS_AS(
      best_response(ind, gate, x,
                    ActionSet::finite_grid({{0.0, 0.0}, {1.0, 0.0}}),
                    ClosedFormSolver{}),
      SolverMismatchError);

  GridSolver runaway;
  runaway.resolution = 1e-4;
  runaway.radius = 100.0;
  QuadraticCost c({1.0, 0.0, 0.0, 1.0}, 2);
  CHECK_THROWS_AS(best_response(lin, c, x, ActionSet::full_space(2), runaway),
                  SolverMismatchError);
}

TEST_CASE("restricted action sets stay restricted") {
  LinearScoreClassifier f(2, {{0, 1.0}, {1, 1.0}}, 0.0, 1e9);
  QuadraticCost c({1.0, 0.0, 0.0, 1.0}, 2);
  std::vector<double> x{0.0, 0.0};

  GridSolver grid;
  grid.resolution = 0.25;
  grid.radius = 2.0;
  BestResponse line =
      best_response(f, c, x, ActionSet::coordinate_line(2, 1), grid);
  CHECK(line.action[0] == 0.0);
  CHECK(line.action[1] == doctest::Approx(1.0));

  BestResponse pick = best_response(
      f, c, x, ActionSet::finite_grid({{0.0, 0.0}, {0.5, 0.5}, {3.0, 3.0}}),
      grid);
  CHECK(pick.action == std::vector<double>{0.5, 0.5});
}

TEST_CASE("epsilon best responses admit slack") {
  LinearScoreClassifier f(1, {{0, 1.0}}, 0.0, 1e9);
  QuadraticCost c({1.0}, 1);
  std::vector<double> x{0.0};
  BestResponse best =
      best_response(f, c, x, ActionSet::full_space(1), ClosedFormSolver{});
  std::vector<double> nearby{0.8};
  CHECK(is_epsilon_best_response(f, c, x, best.action, 0.999, best.utility));
  CHECK(is_epsilon_best_response(f, c, x, nearby, 0.1, best.utility));
  CHECK(!is_epsilon_best_response(f, c, x, nearby, 0.99, best.utility));
  CHECK_THROWS_AS(
      is_epsilon_best_response(f, c, x, nearby, 0.0, best.utility),
      std::invalid_argument);
}
