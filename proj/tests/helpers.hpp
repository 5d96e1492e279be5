#pragma once

// Shared model builders for the test suite.

#include <vector>

#include "strategem/scm.hpp"

namespace testutil {

using namespace strategem;

// x -> y with y = weight * x + u_y, standard normal noise everywhere.
inline Scm chain2(double weight = 1.0) {
  Scm scm;
  scm.dag = CausalDag({"x", "y"}, {{0, 1}});
  scm.equations = {ConstantFn{0.0}, LinearFn{0.0, {{0, weight}}}};
  scm.noises = {NoiseSpec::gaussian(0.0, 1.0), NoiseSpec::gaussian(0.0, 1.0)};
  scm.composition = {NoiseComposition::Additive, NoiseComposition::Additive};
  scm.support_bound = 8.0;
  return scm;
}

// a -> b -> c.
inline Scm chain3(double w1, double w2) {
  Scm scm;
  scm.dag = CausalDag({"a", "b", "c"}, {{0, 1}, {1, 2}});
  scm.equations = {ConstantFn{0.0}, LinearFn{0.0, {{0, w1}}},
                   LinearFn{0.0, {{1, w2}}}};
  scm.noises = {NoiseSpec::gaussian(0.0, 1.0), NoiseSpec::gaussian(0.0, 1.0),
                NoiseSpec::gaussian(0.0, 1.0)};
  scm.composition = {NoiseComposition::Additive, NoiseComposition::Additive,
                     NoiseComposition::Additive};
  scm.support_bound = 10.0;
  return scm;
}

// a -> b, a -> c, b -> d, c -> d.
inline Scm diamond(double wab, double wac, double wbd, double wcd) {
  Scm scm;
  scm.dag = CausalDag({"a", "b", "c", "d"}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  scm.equations = {ConstantFn{0.0}, LinearFn{0.0, {{0, wab}}},
                   LinearFn{0.0, {{0, wac}}},
                   LinearFn{0.0, {{1, wbd}, {2, wcd}}}};
  scm.noises.assign(4, NoiseSpec::gaussian(0.0, 1.0));
  scm.composition.assign(4, NoiseComposition::Additive);
  scm.support_bound = 16.0;
  return scm;
}

// y = eps * x with eps a Rademacher sign embedded in the equation.
inline Scm noisy_product() {
  Scm scm;
  scm.dag = CausalDag({"x", "y"}, {{0, 1}});
  scm.equations = {ConstantFn{0.0}, ProductFn{0, kOwnNoise}};
  scm.noises = {NoiseSpec::gaussian(0.0, 1.0), NoiseSpec::rademacher()};
  scm.composition = {NoiseComposition::Additive, NoiseComposition::Embedded};
  scm.support_bound = 8.0;
  return scm;
}

// Roots x and z plus y = x + u_y; z never touches y.
inline Scm two_feature_model() {
  Scm scm;
  scm.dag = CausalDag({"x", "z", "y"}, {{0, 2}});
  scm.equations = {ConstantFn{0.0}, ConstantFn{0.0},
                   LinearFn{0.0, {{0, 1.0}}}};
  scm.noises.assign(3, NoiseSpec::gaussian(0.0, 1.0));
  scm.composition.assign(3, NoiseComposition::Additive);
  scm.support_bound = 8.0;
  return scm;
}

// Label y driven by the first `causal.size()` of n root features; the rest
// never touch it.
inline Scm star_model(int n_features, const std::vector<double>& weights) {
  std::vector<std::string> names;
  std::vector<Edge> edges;
  Scm scm;
  for (int i = 0; i < n_features; ++i) {
    names.push_back("x" + std::to_string(i + 1));
    scm.equations.push_back(ConstantFn{0.0});
    scm.noises.push_back(NoiseSpec::gaussian(0.0, 1.0));
    scm.composition.push_back(NoiseComposition::Additive);
  }
  names.push_back("y");
  LinearFn label_eq;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] != 0.0) {
      edges.push_back({static_cast<int>(i), n_features});
      label_eq.terms.push_back({static_cast<int>(i), weights[i]});
    }
  }
  scm.equations.push_back(label_eq);
  scm.noises.push_back(NoiseSpec::gaussian(0.0, 1.0));
  scm.composition.push_back(NoiseComposition::Additive);
  scm.dag = CausalDag(std::move(names), std::move(edges));
  scm.support_bound = 12.0;
  return scm;
}

}  // namespace testutil
