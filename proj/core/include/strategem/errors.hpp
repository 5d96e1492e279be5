#pragma once

#include <stdexcept>
#include <string>

namespace strategem {

// Base class for every error raised by the library. Model errors (graph
// defects hit at evaluation time, unsupported queries, solver misuse) derive
// from this; scenario files that fail schema validation raise ScenarioError
// so callers can distinguish bad input files from bad models.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class CyclicGraphError : public Error {
 public:
  using Error::Error;
};

class UnknownNodeError : public Error {
 public:
  using Error::Error;
};

class EvaluationDomainError : public Error {
 public:
  using Error::Error;
};

class NonAdditiveAbductionError : public Error {
 public:
  using Error::Error;
};

class InconsistentEventError : public Error {
 public:
  using Error::Error;
};

class UnsupportedConditioningError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class SolverMismatchError : public Error {
 public:
  using Error::Error;
};

class BudgetExhaustedError : public Error {
 public:
  using Error::Error;
};

class AssumptionViolatedError : public Error {
 public:
  using Error::Error;
};

class AmbiguousSignError : public Error {
 public:
  using Error::Error;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

}  // namespace strategem
