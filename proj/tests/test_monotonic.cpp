#include <cmath>
#include <memory>

#include "doctest.h"
#include "helpers.hpp"
#include "strategem/errors.hpp"
#include "strategem/monotonic_cost.hpp"

using namespace strategem;

TEST_CASE("outcome deltas are exact for linear paths") {
  Scm scm = testutil::chain2(1.3);
  FeatureSpace features = FeatureSpace::all_except(scm, 1);
  McConfig mc;
  std::vector<double> x{0.4};
  std::vector<double> a{0.7};
  OutcomeDelta d = outcome_delta(scm, 1, features, x, a, mc);
  CHECK(d.delta == doctest::Approx(1.3 * 0.7).epsilon(1e-12));
  CHECK(d.std_error == 0.0);

  std::vector<double> zero{0.0};
  OutcomeDelta none = outcome_delta(scm, 1, features, x, zero, mc);
  CHECK(none.delta == 0.0);
  CHECK(none.std_error == 0.0);
}

TEST_CASE("moves that cannot reach the label are exactly zero") {
  Scm scm = testutil::chain2(1.3);
  // Label is the source; the feature is its own child.
  FeatureSpace features = FeatureSpace::all_except(scm, 0);
  McConfig mc;
  std::vector<double> x{2.0};
  std::vector<double> a{1.5};
  OutcomeDelta d = outcome_delta(scm, 0, features, x, a, mc);
  CHECK(d.delta == 0.0);
  CHECK(d.std_error == 0.0);
}

TEST_CASE("the induced cost clamps harmful moves to zero") {
  auto scm = std::make_shared<Scm>(testutil::chain2(1.3));
  McConfig mc;
  OutcomeMonotonicCost cost(scm, 1, FeatureSpace::all_except(*scm, 1), mc);
  std::vector<double> origin{0.0};
  std::vector<double> up{0.7};
  std::vector<double> down{-0.7};
  CHECK(cost(up, origin) == doctest::Approx(1.3 * 0.7).epsilon(1e-12));
  CHECK(cost(down, origin) == 0.0);
  long before = cost.evaluations();
  CHECK(cost(up, origin) == doctest::Approx(1.3 * 0.7).epsilon(1e-12));
  CHECK(cost.evaluations() == before + 1);  // counted even when cached
}

TEST_CASE("delta inspection bypasses the clamp") {
  auto scm = std::make_shared<Scm>(testutil::chain2(-2.0));
  McConfig mc;
  OutcomeMonotonicCost cost(scm, 1, FeatureSpace::all_except(*scm, 1), mc);
  std::vector<double> origin{0.0};
  std::vector<double> up{1.0};
  OutcomeDelta d = cost.delta(origin, up);
  CHECK(d.delta == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(cost(up, origin) == 0.0);
}

TEST_CASE("cost probing orients chains and flipped edges") {
  CostProbeSpec probe;

  Scm chain = testutil::chain3(0.9, 1.1);
  OrientationResult r =
      orient_edges_via_cost(skeleton_of(chain.dag), chain, probe);
  CHECK(r.oracle_calls == 2);
  CHECK(r.transcript.size() == 2);
  CHECK(r.oriented.has_edge(0, 1));
  CHECK(r.oriented.has_edge(1, 2));
  for (const EdgeDecision& d : r.transcript) {
    CHECK(d.outcome == OracleOutcome::Classifier);
  }

  Scm flipped;
  flipped.dag = CausalDag({"sink", "src"}, {{1, 0}});
  flipped.equations = {LinearFn{0.0, {{1, 0.9}}}, ConstantFn{0.0}};
  flipped.noises.assign(2, NoiseSpec::gaussian(0.0, 1.0));
  flipped.composition.assign(2, NoiseComposition::Additive);
  flipped.support_bound = 8.0;
  OrientationResult r2 =
      orient_edges_via_cost(skeleton_of(flipped.dag), flipped, probe);
  CHECK(r2.oriented.has_edge(1, 0));
  CHECK(r2.transcript[0].outcome == OracleOutcome::Fail);
}

TEST_CASE("both orientation routes tell the same story") {
  Scm diamond = testutil::diamond(0.9, -1.1, 1.3, 0.7);
  OrientationResult via_oracle =
      orient_edges(skeleton_of(diamond.dag), diamond, 0.5, ControlGrid{});
  OrientationResult via_cost =
      orient_edges_via_cost(skeleton_of(diamond.dag), diamond,
                            CostProbeSpec{});
  for (const Edge& e : diamond.dag.edges()) {
    CHECK(via_oracle.oriented.has_edge(e.parent, e.child));
    CHECK(via_cost.oriented.has_edge(e.parent, e.child));
  }
}

TEST_CASE("sign recovery splits causal from idle features") {
  Scm scm = testutil::star_model(5, {2.0, -0.5, 1.5, 0.0, 0.0});
  McConfig mc;
  OutcomeMonotonicCost cost(std::make_shared<Scm>(scm), 5,
                            FeatureSpace::all_except(scm, 5), mc);
  SignRecoveryResult r = linear_sign_recovery(cost);
  CHECK(r.query_count == 10);
  REQUIRE(r.features.size() == 5);
  CHECK(r.features[0].causal);
  CHECK(r.features[0].sign == 1);
  CHECK(r.features[0].probe_plus == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.features[1].causal);
  CHECK(r.features[1].sign == -1);
  CHECK(r.features[1].probe_minus == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.features[2].causal);
  CHECK(r.features[2].sign == 1);
  CHECK(!r.features[3].causal);
  CHECK(r.features[3].sign == 0);
  CHECK(!r.features[4].causal);
}

TEST_CASE("a convex label response defeats linear sign recovery") {
  Scm scm;
  scm.dag = CausalDag({"x", "y"}, {{0, 1}});
  PolynomialFn square;
  square.terms.push_back(Monomial{1.0, {{0, 2}}});
  scm.equations = {ConstantFn{0.0}, square};
  scm.noises.assign(2, NoiseSpec::gaussian(0.0, 1.0));
  scm.composition.assign(2, NoiseComposition::Additive);
  scm.support_bound = 8.0;
  McConfig mc;
  OutcomeMonotonicCost cost(std::make_shared<Scm>(scm), 1,
                            FeatureSpace::all_except(scm, 1), mc);
  CHECK_THROWS_AS(linear_sign_recovery(cost), AmbiguousSignError);
}

TEST_CASE("cost orientation rejects a mismatched skeleton") {
  Scm chain = testutil::chain3(1.0, 1.0);
  Skeleton wrong = skeleton_of(chain.dag);
  wrong.edges.pop_back();
  CHECK_THROWS_AS(orient_edges_via_cost(wrong, chain, CostProbeSpec{}),
                  std::invalid_argument);
}
