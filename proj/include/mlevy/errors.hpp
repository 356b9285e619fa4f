#pragma once

#include <stdexcept>
#include <string>

namespace mlevy {

// Precondition violations on model parameters, cutoffs or grids.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// The (alpha, symmetry, drift) combination is not covered by any of the
// five rate regimes.
class RegimeError : public DomainError {
  public:
    using DomainError::DomainError;
};

// Quadrature or root finding did not reach the requested accuracy.
class NumericalError : public std::runtime_error {
  public:
    NumericalError(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}

    double achieved() const noexcept { return achieved_; }

  private:
    double achieved_;
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace mlevy
