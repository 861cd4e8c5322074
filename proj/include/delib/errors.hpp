#pragma once

#include <stdexcept>
#include <string>

namespace delib {

/// Base class for failures caused by the inputs rather than by the program.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInstance : DomainError {
  using DomainError::DomainError;
};
struct InvalidConfig : DomainError {
  using DomainError::DomainError;
};
struct ZeroCandidateDistance : DomainError {
  ZeroCandidateDistance(const std::string& a, const std::string& b)
      : DomainError("candidates " + a + " and " + b + " are at distance 0") {}
};
struct UnknownCandidate : DomainError {
  explicit UnknownCandidate(const std::string& id) : DomainError("unknown candidate: " + id) {}
};
struct DegenerateOptimum : DomainError {
  DegenerateOptimum() : DomainError("optimal social cost is 0; distortion undefined") {}
};
struct EnumerationBudgetExceeded : DomainError {
  using DomainError::DomainError;
};
struct BudgetExceeded : DomainError {
  using DomainError::DomainError;
};
struct NoSamplesForPair : DomainError {
  NoSamplesForPair(std::size_t i, std::size_t j)
      : DomainError("no observations for pair (" + std::to_string(i) + ", " + std::to_string(j) + ")") {}
};
struct ThetaOutOfRange : DomainError {
  explicit ThetaOutOfRange(double t) : DomainError("theta must lie in [0,1), got " + std::to_string(t)) {}
};

}  // namespace delib
