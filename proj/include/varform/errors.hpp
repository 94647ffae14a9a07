#ifndef VARFORM_ERRORS_HPP_
#define VARFORM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace varform {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Contract violations: bad arguments, mismatched dimensions, out-of-range flags.
struct ContractError : Error {
  using Error::Error;
};

// Design density is negative at a quadrature node, or does not integrate to 1.
struct InvalidDensityError : Error {
  using Error::Error;
};

// Difference-sequence coefficients violate the defining constraints.
struct InvalidSequenceError : Error {
  using Error::Error;
};

// Not enough observations for the requested difference order.
struct InsufficientDataError : Error {
  using Error::Error;
};

// A kernel window contains too few points to form weights.
struct BandwidthTooSmallError : Error {
  using Error::Error;
};

// No candidate bandwidth on the cross-validation grid was usable.
struct NoValidBandwidthError : Error {
  using Error::Error;
};

// All smoothed fourth-moment values are zero; the variance estimate is degenerate.
struct DegenerateVarianceError : Error {
  using Error::Error;
};

// Basis Gram matrix is singular or numerically ill-conditioned.
struct CollinearBasisError : Error {
  using Error::Error;
};

// Nonlinear least-squares fit failed to converge.
struct FitFailureError : Error {
  using Error::Error;
};

// Tail Gram matrix H_n is rank-deficient or ill-conditioned at some design point.
struct SingularHError : Error {
  using Error::Error;
};

// Scenario configuration defines a negative variance function.
struct InvalidScenarioError : Error {
  using Error::Error;
};

// Too many Monte Carlo replications failed.
struct HarnessError : Error {
  using Error::Error;
};

}  // namespace varform

#endif  // VARFORM_ERRORS_HPP_
