#pragma once

#include <cstdint>
#include <span>

#include "strategem/agent.hpp"
#include "strategem/scm.hpp"

namespace strategem {

enum class Verdict { Improvement, Gaming, Inconclusive };

const char* verdict_name(Verdict v);

// Point estimate of an improvement functional together with the one-sided
// decision at the configured significance level.
struct ImprovementEstimate {
  double point = 0.0;
  double std_error = 0.0;
  long n = 0;
  Verdict verdict = Verdict::Inconclusive;
  double alpha = 0.01;
};

struct McConfig {
  long n_outer = 2000;
  long n_inner = 200;
  std::uint64_t seed = 0;
  double alpha = 0.01;
  int threads = 1;
  // When true, conditional means with a closed form are evaluated exactly
  // (zero inner variance); set false to force Monte Carlo everywhere.
  bool allow_analytic = true;
};

// One-sided Gaussian test at level alpha: Improvement when the lower
// confidence bound clears zero, Gaming when the upper bound does not,
// Inconclusive when the interval straddles zero. A zero standard error
// degenerates to the sign of the point estimate (ties count as Gaming).
Verdict decide_verdict(double point, double std_error, double alpha);

// Improvement for one individual with feature vector x: the agent best
// responds to f under the cost, the moved coordinates are applied as an
// intervention, and the result is the interventional label mean minus the
// conditional label mean, both given the observed features.
ImprovementEstimate individual_improvement(
    const Scm& scm, int label, const Classifier& f, const Cost& cost,
    std::span<const double> x, const FeatureSpace& features,
    const ActionSet& actions, const Solver& solver, const McConfig& mc);

// Population improvement: average of the individual two-term difference over
// n_outer sampled individuals. Both terms are evaluated per individual
// (exactly when analytic, otherwise with derived inner streams), so each
// summand is an unbiased paired difference and the outer spread already
// accounts for inner noise.
ImprovementEstimate population_improvement(const Scm& scm, int label,
                                           const Classifier& f,
                                           const Cost& cost,
                                           const FeatureSpace& features,
                                           const ActionSet& actions,
                                           const Solver& solver,
                                           const McConfig& mc);

// Potential-outcome form: E[Y_{X := adapted}(u) - Y(u)] averaged over full
// model draws, with the counterfactual evaluated pathwise from the recovered
// noise. Requires additive composition on the abduced nodes; agrees with
// population_improvement in expectation.
ImprovementEstimate potential_outcome_improvement(
    const Scm& scm, int label, const Classifier& f, const Cost& cost,
    const FeatureSpace& features, const ActionSet& actions,
    const Solver& solver, const McConfig& mc);

}  // namespace strategem
