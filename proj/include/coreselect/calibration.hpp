#pragma once

#include <stdexcept>
#include <string>

#include "coreselect/sample.hpp"

namespace coreselect {

// Raised when a requested coverage radius cannot absorb the prediction
// error at the requested confidence.
class InfeasibleConfigError : public std::runtime_error {
 public:
  explicit InfeasibleConfigError(const std::string& what)
      : std::runtime_error(what) {}
};

// CDF of the chi-squared distribution with d degrees of freedom, via the
// regularized lower incomplete gamma function.
double chi2_cdf(double x, int d);

// Quantile function: returns x with |chi2_cdf(x, d) - p| <= 1e-10.
double chi2_inv_cdf(double p, int d);

// Radii handed to the sampling loop: delta0 gates coverage by already
// collected samples, delta1 gates coverage among the window's predictions.
struct RunRadii {
  double delta0 = 0.0;
  double delta1 = 0.0;
};

// Target coverage radius plus the forecast-error model that shrinks it.
struct CalibrationConfig {
  double delta = 0.0;    // target coverage radius in feature-space units
  double epsilon = 0.0;  // per-window failure probability, in (0,1)
  int window_n = 1;      // prediction window length
  int dims = 1;          // feature dimension d
  double sigma2 = 0.0;   // per-attribute prediction MSE
  Capacity kappa = Capacity::unbounded();
};

// Smallest target radius the error model admits at all; the shrunken radii
// are nonnegative iff delta is at least this.
double min_feasible_delta(double epsilon, int window_n, int dims,
                          double sigma2);

// Shrinks delta into (delta0, delta1) compensating for prediction error.
// Throws InfeasibleConfigError when delta < min_feasible_delta.
RunRadii derive_radii(const CalibrationConfig& config);

// Single-step variant of the shrinkage; equals derive_radii(..).delta0 at
// window_n = 1.
double corollary_radius(double delta, double sigma1_sq, double epsilon,
                        int dims);

}  // namespace coreselect
