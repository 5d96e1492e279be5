#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "strategem/agent.hpp"
#include "strategem/improvement.hpp"
#include "strategem/scm.hpp"

namespace strategem {

// Settings for control-function construction and for the certificates the
// oracle attaches to its answers.
struct ControlGrid {
  int n_candidates = 64;   // intervention values, evenly spaced in [-B, B]
  int mesh_size = 64;      // representative draws of the observed profile
  int cells_per_dim = 32;  // discretization of each recovered-noise axis
  double margin_z = 3.0;   // required mean lift, in standard errors
  McConfig mc;             // estimation settings (seed, sample sizes, threads)
};

// Evenly spaced candidate grid over [-bound, bound], endpoints included.
std::vector<double> linspace_candidates(double bound, int n);

// Tabulated intervention policy for one directed edge (v -> w): maps the
// noise profile of w's other ancestors to the intervention value on v that
// maximized the estimated interventional mean of w.
struct ControlFunction {
  Scm scm;                      // model the table was built against
  Edge edge{-1, -1};            // (v, w)
  std::vector<double> candidates;
  std::vector<int> cell_nodes;  // ancestors of w with a path avoiding v
  std::vector<double> cell_lo;  // per-axis discretization range
  std::vector<double> cell_hi;
  int cells_per_dim = 1;
  std::map<std::vector<int>, double> table;  // cell key -> chosen candidate
  // Mean advantage of following the policy over pinning v at its observed
  // value, paired per mesh point so the statistic reflects only what flows
  // through v.
  double lift = 0.0;
  double lift_se = 0.0;

  // Recovers the keyed noises from a full assignment (the w slot is ignored)
  // and returns the stored candidate of that cell, falling back to the
  // nearest populated cell.
  double operator()(const Assignment& values) const;

  std::vector<int> cell_key(const Assignment& values) const;
};

// Builds the policy for edge (v -> w), or nullopt when no intervention on v
// moves w's estimated mean beyond margin_z standard errors of leaving v at
// its observed value. When every candidate produces the identical estimate
// at every mesh point (v provably cannot reach w), the rejection is exact.
std::optional<ControlFunction> construct_control_function(
    const Scm& scm, Edge edge, const ControlGrid& grid);

struct AssumptionCheck {
  bool holds = false;
  std::optional<ControlFunction> witness;
};

// Decides whether some intervention policy on v lifts w above leaving v
// alone; the witness is the constructed policy when it does.
AssumptionCheck check_control_assumption(const Scm& scm, Edge edge,
                                         const ControlGrid& grid);

// An instance of the good-incentives decision problem: find a classifier
// whose induced adaptation raises the label, or report that none exists in
// the searched family.
struct GoodIncentivesInstance {
  Scm scm;
  int label = -1;
  std::shared_ptr<const Cost> cost;
  ActionSet actions = ActionSet::full_space(0);
  double eps = 0.5;          // best-response slack tolerated of agents
  FeatureSpace features;     // what the classifier sees (never the label)
};

// Instance augmented for edge probing: a copy node mirroring x_i is appended
// and the cost gates every coordinate except x_i's slot.
struct AugmentedInstance {
  GoodIncentivesInstance inst;
  Edge base_edge{-1, -1};  // (i, j) in base node ids; j is the label
  int copy_node = -1;      // appended node id in inst.scm
  int copy_pos = -1;       // its slot in inst.features
  int moved_pos = -1;      // slot of x_i in inst.features
};

AugmentedInstance build_augmented_instance(const Scm& scm, Edge edge,
                                           double eps);

enum class OracleOutcome { Classifier, Fail };

const char* oracle_outcome_name(OracleOutcome o);

struct OracleAnswer {
  OracleOutcome outcome = OracleOutcome::Fail;
  std::shared_ptr<const Classifier> classifier;    // set when Classifier
  std::optional<ImprovementEstimate> certificate;  // set when Classifier
  std::optional<ControlFunction> control;          // constructive policy used
};

// Constructive strategy: requires the gated-coordinate cost of an augmented
// instance. Builds the control function for (x_i, label); when it exists the
// answer is the indicator classifier rewarding x_i = h(copy profile),
// certified by population_improvement, else Fail. A Classifier answer always
// carries a certificate; callers decide what an Inconclusive one means.
OracleAnswer good_incentives_oracle(const AugmentedInstance& aug,
                                    const ControlGrid& grid);

// Search strategy: enumerate linear scores with weights drawn coordinatewise
// from weight_values (the all-zero combination is skipped), certify each, and
// return the first whose certificate verdict is Improvement. Exhausting the
// family is Fail; running out of budget first raises BudgetExhaustedError.
struct SearchStrategy {
  std::vector<double> weight_values{-1.0, 0.0, 1.0};
  double offset = 0.0;
  long budget = 64;  // maximum number of certified candidates
  Solver solver = GridSolver{};
  McConfig mc;
};

OracleAnswer good_incentives_oracle(const GoodIncentivesInstance& inst,
                                    const SearchStrategy& strategy);

struct EdgeDecision {
  Edge undirected{-1, -1};  // as listed in the skeleton (min, max)
  Edge oriented{-1, -1};    // chosen direction
  OracleOutcome outcome = OracleOutcome::Fail;  // answer for min -> max
  std::optional<ImprovementEstimate> certificate;
};

struct OrientationResult {
  CausalDag oriented;
  std::vector<EdgeDecision> transcript;
  long oracle_calls = 0;
};

// Orients every skeleton edge with one constructive oracle call on the
// augmented instance that makes the greater node the label: a Classifier
// answer keeps min -> max, Fail flips it. The skeleton must match the ground
// truth model's. Raises AssumptionViolatedError when a Classifier answer
// arrives without a significant certificate (an inconsistent world).
OrientationResult orient_edges(const Skeleton& skeleton, const Scm& scm_truth,
                               double eps, const ControlGrid& grid);

}  // namespace strategem
