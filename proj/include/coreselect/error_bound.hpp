#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "coreselect/geometry.hpp"
#include "coreselect/sample.hpp"

namespace coreselect {

// Constants of the downstream learner; user-supplied, never estimated.
struct BoundParams {
  double loss_bound = 1.0;         // L, uniform loss upper bound
  double lambda_loss = 1.0;        // Lipschitz constant of the loss
  double lambda_regression = 0.0;  // Lipschitz constant of the regression fn
  int num_classes = 1;             // C
  double gamma = 1.0;              // confidence parameter, in (0, 2]
  std::uint64_t n = 0;             // candidate count behind the coreset
  std::optional<std::vector<double>> training_losses;
};

struct BoundTerms {
  double radius_term = 0.0;
  double hoeffding_term = 0.0;
  double weight_term = 0.0;
  double training_term = 0.0;
  double total = 0.0;
};

namespace detail {

inline void check_bound_params(const BoundParams& params) {
  if (!(params.loss_bound > 0.0)) {
    throw std::invalid_argument("loss bound L must be > 0");
  }
  if (params.lambda_loss < 0.0 || params.lambda_regression < 0.0) {
    throw std::invalid_argument("Lipschitz constants must be >= 0");
  }
  if (params.num_classes < 1) {
    throw std::invalid_argument("class count must be >= 1");
  }
  // gamma = 2 zeroes the deviation terms; beyond 2 the square roots go
  // negative, below 0 the confidence is meaningless.
  if (!(params.gamma > 0.0 && params.gamma <= 2.0)) {
    throw std::invalid_argument("gamma must lie in (0, 2]");
  }
}

inline double log_2_over_gamma(const BoundParams& params) {
  return std::log(2.0 / params.gamma);
}

}  // namespace detail

// The four summands of the generalization gap estimate for a coreset
// covering at radius delta, plus their sum. training_term is 0 when no
// per-entry losses are supplied.
inline BoundTerms bound_terms(const WeightedCoreset& coreset, double delta,
                              const BoundParams& params) {
  detail::check_bound_params(params);
  if (delta < 0.0) throw std::invalid_argument("delta must be >= 0");
  if (params.n == 0) throw std::invalid_argument("candidate count n must be >= 1");
  if (params.training_losses.has_value() &&
      params.training_losses->size() != coreset.entries.size()) {
    throw std::invalid_argument(
        "training losses must match the coreset size");
  }

  const double L = params.loss_bound;
  const double log_term = detail::log_2_over_gamma(params);
  const double n = static_cast<double>(params.n);

  double weight_sq_sum = 0.0;
  for (const CoresetEntry& entry : coreset.entries) {
    const double u = static_cast<double>(entry.weight);
    weight_sq_sum += u * u;
  }

  BoundTerms terms;
  terms.radius_term =
      delta * (params.lambda_loss +
               params.lambda_regression * L * params.num_classes);
  terms.hoeffding_term = std::sqrt(L * L * log_term / (2.0 * n));
  terms.weight_term =
      std::sqrt(L * L * log_term / (2.0 * n * n) * weight_sq_sum);
  if (params.training_losses.has_value()) {
    double acc = 0.0;
    for (std::size_t j = 0; j < coreset.entries.size(); ++j) {
      acc += static_cast<double>(coreset.entries[j].weight) / n *
             (*params.training_losses)[j];
    }
    terms.training_term = acc;
  }
  terms.total = terms.radius_term + terms.hoeffding_term + terms.weight_term +
                terms.training_term;
  return terms;
}

// Weight-norm coefficient of the selection objective; 0 at gamma = 2.
inline double nu(const BoundParams& params) {
  detail::check_bound_params(params);
  const double denom =
      params.lambda_loss +
      params.lambda_regression * params.loss_bound * params.num_classes;
  if (denom <= 0.0) {
    throw std::invalid_argument("lambda_l + lambda_eta*L*C must be > 0");
  }
  return std::sqrt(params.loss_bound * params.loss_bound *
                   detail::log_2_over_gamma(params) / 2.0) /
         denom;
}

// The selection objective delta + nu * ||u~||.
inline double coreset_objective(double delta, const WeightedCoreset& coreset,
                                double nu_value) {
  if (!std::isfinite(delta) || !std::isfinite(nu_value)) {
    throw std::invalid_argument("objective inputs must be finite");
  }
  return delta + nu_value * weight_norm(coreset);
}

}  // namespace coreselect
