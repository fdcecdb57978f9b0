#pragma once

#include <stdexcept>
#include <string>

namespace crc {

/// Bad or inconsistent input data / configuration.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical step could not be carried out (singular system, degenerate density, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The cross-validation environment failed one of its feasibility gates.
enum class FeasibilityCondition {
  kEmptyEvaluationSet,
  kExcessiveTrimming,
  kExplodingInstability,
  kDegenerateFrequency,
};

const char* to_string(FeasibilityCondition c);

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(FeasibilityCondition condition, const std::string& detail)
      : std::runtime_error(std::string(to_string(condition)) + ": " + detail),
        condition_(condition) {}

  FeasibilityCondition condition() const noexcept { return condition_; }

 private:
  FeasibilityCondition condition_;
};

}  // namespace crc
