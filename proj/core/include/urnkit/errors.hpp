#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace urnkit {

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument or violated precondition (e.g. rate_bn with n < 16).
struct DomainError : Error {
  using Error::Error;
};

// A configuration document failed validation. Carries one message per
// violated invariant so callers can report them all at once.
struct ConfigError : Error {
  explicit ConfigError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}
  explicit ConfigError(const std::string& issue)
      : ConfigError(std::vector<std::string>{issue}) {}

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += "\n";
      out += v[i];
    }
    return out;
  }
  std::vector<std::string> issues_;
};

// The mean matrix admits no strictly positive right eigenvector for its
// dominant eigenvalue (e.g. a sub-dominant class feeds no dominant class).
struct NoPositiveRightEigenvector : Error {
  using Error::Error;
};

// The dominant eigenvalue is not strictly positive.
struct NonPositiveLambda : Error {
  using Error::Error;
};

// Total mass left the admissible window during ODE integration.
struct BlowUpError : Error {
  using Error::Error;
};

// The policy has no analytic mean matrix (e.g. infinite expectation).
struct MeanUnavailableError : Error {
  using Error::Error;
};

// A replacement policy failed to produce a sample.
struct PolicySampleError : Error {
  using Error::Error;
};

// The branching population died out before the requested number of splits.
struct ExtinctionError : Error {
  using Error::Error;
};

// Exact law enumeration exceeded the state budget (or is impossible).
struct StateSpaceTooLargeError : Error {
  using Error::Error;
};

// An operation that requires a reducible profile (nu1 >= 2) got nu1 == 1.
struct NotReducibleError : Error {
  using Error::Error;
};

// The checkpoint schedule cannot support a rate fit.
struct InsufficientCheckpointsError : Error {
  using Error::Error;
};

}  // namespace urnkit
