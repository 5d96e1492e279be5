#include <cmath>
#include <memory>

#include "doctest.h"
#include "helpers.hpp"
#include "strategem/errors.hpp"
#include "strategem/incentive_design.hpp"

using namespace strategem;

TEST_CASE("candidate grids hit both endpoints exactly") {
  std::vector<double> c = linspace_candidates(4.0, 5);
  CHECK(c == std::vector<double>{-4.0, -2.0, 0.0, 2.0, 4.0});
  std::vector<double> wide = linspace_candidates(7.5, 64);
  CHECK(wide.front() == -7.5);
  CHECK(wide.back() == 7.5);
  CHECK(wide.size() == 64);
  CHECK_THROWS_AS(linspace_candidates(1.0, 1), std::invalid_argument);
}

TEST_CASE("control function for a direct edge saturates at the bound") {
  Scm scm = testutil::chain2(0.8);
  ControlGrid grid;
  auto cf = construct_control_function(scm, Edge{0, 1}, grid);
  REQUIRE(cf.has_value());
  // With a positive weight the best intervention is the top of the range,
  // whatever the profile.
  Assignment probe{0.3, -2.0};
  CHECK((*cf)(probe) == scm.support_bound);
  // Lift is the paired advantage over leaving x alone: 0.8 * (B - x) on
  // average, so close to 0.8 * B for a centered x.
  CHECK(cf->lift == doctest::Approx(0.8 * scm.support_bound).epsilon(0.15));
  CHECK(cf->lift > 3.0 * cf->lift_se);

  Scm negative = testutil::chain2(-0.8);
  auto cf2 = construct_control_function(negative, Edge{0, 1}, grid);
  REQUIRE(cf2.has_value());
  CHECK((*cf2)(probe) == -negative.support_bound);
}

TEST_CASE("control functions key on the profile of other ancestors") {
  // w has two parents; controlling v must condition on a's noise.
  Scm scm;
  scm.dag = CausalDag({"a", "v", "w"}, {{0, 2}, {1, 2}});
  scm.equations = {ConstantFn{0.0}, ConstantFn{0.0},
                   LinearFn{0.0, {{0, 1.5}, {1, 0.6}}}};
  scm.noises.assign(3, NoiseSpec::gaussian(0.0, 1.0));
  scm.composition.assign(3, NoiseComposition::Additive);
  scm.support_bound = 8.0;

  ControlGrid grid;
  auto cf = construct_control_function(scm, Edge{1, 2}, grid);
  REQUIRE(cf.has_value());
  CHECK(cf->cell_nodes == std::vector<int>{0});
  CHECK(!cf->table.empty());
  // Linear response: every cell agrees on the saturating intervention.
  for (const auto& [key, value] : cf->table) {
    CHECK(value == scm.support_bound);
  }
}

TEST_CASE("reversed and severed edges yield no control function") {
  Scm scm = testutil::chain2(1.1);
  ControlGrid grid;
  CHECK(!construct_control_function(scm, Edge{1, 0}, grid).has_value());

  Scm prod = testutil::noisy_product();
  CHECK(!construct_control_function(prod, Edge{0, 1}, grid).has_value());
  CHECK(!construct_control_function(prod, Edge{1, 0}, grid).has_value());
}

TEST_CASE("assumption check mirrors control construction") {
  Scm scm = testutil::chain2(0.9);
  ControlGrid grid;
  AssumptionCheck yes = check_control_assumption(scm, Edge{0, 1}, grid);
  CHECK(yes.holds);
  REQUIRE(yes.witness.has_value());
  CHECK(yes.witness->lift > 0.0);
  AssumptionCheck no = check_control_assumption(scm, Edge{1, 0}, grid);
  CHECK(!no.holds);
  CHECK(!no.witness.has_value());
}

TEST_CASE("augmentation appends a mirrored sink with a gated cost") {
  Scm scm = testutil::chain2(1.0);
  AugmentedInstance aug = build_augmented_instance(scm, Edge{0, 1}, 0.5);
  const Scm& a = aug.inst.scm;
  CHECK(a.node_count() == 3);
  CHECK(a.dag.name(2) == "x_copy");
  CHECK(a.dag.has_edge(0, 2));
  CHECK(aug.copy_node == 2);
  CHECK(aug.inst.label == 1);
  CHECK(aug.inst.features.dim() == 2);
  CHECK(aug.moved_pos == aug.inst.features.pos_of(0));
  CHECK(aug.copy_pos == aug.inst.features.pos_of(2));
  REQUIRE(aug.inst.cost != nullptr);
  CHECK(aug.inst.cost->kind() == CostKind::GatedCoordinate);

  // The copy mirrors its source exactly.
  for (const Draw& d : sample(a, 40, 3)) {
    CHECK(d.values[2] == d.values[0]);
  }

  // Name collisions are resolved by appending underscores.
  Scm clash;
  clash.dag = CausalDag({"x", "x_copy"}, {{0, 1}});
  clash.equations = {ConstantFn{0.0}, LinearFn{0.0, {{0, 1.0}}}};
  clash.noises.assign(2, NoiseSpec::gaussian(0.0, 1.0));
  clash.composition.assign(2, NoiseComposition::Additive);
  clash.support_bound = 4.0;
  AugmentedInstance aug2 = build_augmented_instance(clash, Edge{0, 1}, 0.5);
  CHECK(aug2.inst.scm.dag.name(2) == "x_copy_");

  CHECK_THROWS_AS(build_augmented_instance(scm, Edge{0, 1}, 1.5),
                  std::invalid_argument);
}

TEST_CASE("constructive oracle certifies a real edge and fails a reversed one") {
  Scm scm = testutil::chain2(1.2);
  ControlGrid grid;

  AugmentedInstance forward = build_augmented_instance(scm, Edge{0, 1}, 0.5);
  OracleAnswer yes = good_incentives_oracle(forward, grid);
  CHECK(yes.outcome == OracleOutcome::Classifier);
  REQUIRE(yes.classifier != nullptr);
  CHECK(yes.classifier->kind() == ClassifierKind::IndicatorMatch);
  REQUIRE(yes.certificate.has_value());
  CHECK(yes.certificate->verdict == Verdict::Improvement);
  CHECK(yes.certificate->point > 0.0);
  CHECK(yes.control.has_value());

  AugmentedInstance backward = build_augmented_instance(scm, Edge{1, 0}, 0.5);
  OracleAnswer no = good_incentives_oracle(backward, grid);
  CHECK(no.outcome == OracleOutcome::Fail);
  CHECK(no.classifier == nullptr);
}

TEST_CASE("search oracle walks the weight lattice under a budget") {
  Scm scm = testutil::chain2(1.5);
  GoodIncentivesInstance inst;
  inst.scm = scm;
  inst.label = 1;
  inst.features = FeatureSpace::all_except(scm, 1);
  inst.cost = std::make_shared<ZeroCost>(1);
  inst.actions = ActionSet::full_space(1);

  SearchStrategy strat;
  strat.mc.n_outer = 300;
  OracleAnswer found = good_incentives_oracle(inst, strat);
  CHECK(found.outcome == OracleOutcome::Classifier);
  REQUIRE(found.classifier != nullptr);
  REQUIRE(found.certificate.has_value());
  CHECK(found.certificate->verdict == Verdict::Improvement);

  SearchStrategy starved = strat;
  starved.budget = 1;  // the first candidate pushes x the wrong way
  CHECK_THROWS_AS(good_incentives_oracle(inst, starved),
                  BudgetExhaustedError);
}

TEST_CASE("edge orientation recovers chains, forks and colliders") {
  ControlGrid grid;

  Scm chain = testutil::chain3(1.0, -1.4);
  OrientationResult r1 =
      orient_edges(skeleton_of(chain.dag), chain, 0.5, grid);
  CHECK(r1.oracle_calls == 2);
  CHECK(r1.transcript.size() == 2);
  CHECK(r1.oriented.has_edge(0, 1));
  CHECK(r1.oriented.has_edge(1, 2));
  for (const EdgeDecision& d : r1.transcript) {
    CHECK(d.outcome == OracleOutcome::Classifier);
    REQUIRE(d.certificate.has_value());
    CHECK(d.certificate->verdict == Verdict::Improvement);
  }

  // True direction runs against the index order here.
  Scm flipped;
  flipped.dag = CausalDag({"sink", "src"}, {{1, 0}});
  flipped.equations = {LinearFn{0.0, {{1, 0.9}}}, ConstantFn{0.0}};
  flipped.noises.assign(2, NoiseSpec::gaussian(0.0, 1.0));
  flipped.composition.assign(2, NoiseComposition::Additive);
  flipped.support_bound = 8.0;
  OrientationResult r2 =
      orient_edges(skeleton_of(flipped.dag), flipped, 0.5, grid);
  CHECK(r2.oriented.has_edge(1, 0));
  CHECK(r2.transcript.size() == 1);
  CHECK(r2.transcript[0].outcome == OracleOutcome::Fail);

  Scm collider;
  collider.dag = CausalDag({"a", "b", "c"}, {{0, 2}, {1, 2}});
  collider.equations = {ConstantFn{0.0}, ConstantFn{0.0},
                        LinearFn{0.0, {{0, 1.0}, {1, -0.7}}}};
  collider.noises.assign(3, NoiseSpec::gaussian(0.0, 1.0));
  collider.composition.assign(3, NoiseComposition::Additive);
  collider.support_bound = 8.0;
  OrientationResult r3 =
      orient_edges(skeleton_of(collider.dag), collider, 0.5, grid);
  CHECK(r3.oriented.has_edge(0, 2));
  CHECK(r3.oriented.has_edge(1, 2));
}

TEST_CASE("orientation rejects a mismatched skeleton") {
  Scm chain = testutil::chain3(1.0, 1.0);
  Skeleton wrong = skeleton_of(chain.dag);
  wrong.edges.push_back({0, 2});
  CHECK_THROWS_AS(orient_edges(wrong, chain, 0.5, ControlGrid{}),
                  std::invalid_argument);
}
