#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "coreselect/rng.hpp"

namespace coreselect {

// One-window-ahead forecaster. observe() feeds the stream one sample at a
// time (actual or predicted, the caller decides); predict_window() emits
// the next window_n feature vectors without consuming them; mse_estimate()
// is the per-attribute one-step error power, aggregated by max.
class Forecaster {
 public:
  virtual ~Forecaster() = default;

  virtual void observe(const Eigen::VectorXd& sample) = 0;
  virtual std::vector<Eigen::VectorXd> predict_window() = 0;
  virtual double mse_estimate() const = 0;
  virtual std::string name() const = 0;
};

// Repeats the last observed vector; error power tracked as an
// exponentially weighted mean of squared one-step differences.
std::unique_ptr<Forecaster> persistence_forecaster(int window_n, int dims);

// Per-feature affine AR(p) fit by ridge-damped least squares, refit on
// every prediction; rolls forward feeding predictions back as inputs.
// Requires at least 11p observed samples before predicting.
std::unique_ptr<Forecaster> ar_forecaster(int order, int window_n, int dims);

// Emits the true upcoming samples corrupted by i.i.d. N(0, sigma2*I)
// noise, so the true-minus-predicted errors match the error model exactly.
// The cursor into `truth` advances one step per observe() call.
std::unique_ptr<Forecaster> gaussian_oracle_forecaster(
    std::vector<Eigen::VectorXd> truth, double sigma2, std::uint64_t seed,
    int window_n, int dims);

// Root mean squared error divided by |mean| of the true series.
// Throws when lengths differ, are zero, or the true mean is zero.
double nrmse(const std::vector<double>& predicted,
             const std::vector<double>& truth);

// Per-attribute nrmse over vector-valued series.
Eigen::VectorXd nrmse_per_attribute(
    const std::vector<Eigen::VectorXd>& predicted,
    const std::vector<Eigen::VectorXd>& truth);

}  // namespace coreselect
