#pragma once

#include <cstdint>
#include <span>

namespace strategem {

// Inverse of the standard normal CDF. Rational approximation polished with
// one Halley step against erfc, accurate to ~1e-15 over (0, 1).
double probit(double p);

// One-sided critical value z with P(Z > z) = alpha.
double one_sided_z(double alpha);

struct MeanSe {
  double mean = 0.0;
  double std_error = 0.0;
  long n = 0;
};

// Sample mean and standard error of the mean, accumulated in index order so
// the result is identical regardless of how the values were produced.
MeanSe mean_and_se(std::span<const double> values);

}  // namespace strategem
