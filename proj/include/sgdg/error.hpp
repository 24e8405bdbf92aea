#pragma once

#include <stdexcept>
#include <string>

namespace sgdg {

/// Invalid user-supplied parameters (degree out of range, bad problem name, ...).
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A request would exceed a configured size limit (DOF cap, integer overflow).
class ResourceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Quadrature hit a non-finite integrand sample.
class IntegrationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Linear solver failure: non-convergence or detected indefiniteness.
class SolveError : public std::runtime_error {
public:
  enum class Reason { NotConverged, Indefinite, Breakdown };

  SolveError(Reason reason, const std::string& what, double min_ritz)
      : std::runtime_error(what), reason_(reason), min_ritz_(min_ritz) {}

  Reason reason() const noexcept { return reason_; }
  double min_ritz() const noexcept { return min_ritz_; }

private:
  Reason reason_;
  double min_ritz_;
};

}  // namespace sgdg
