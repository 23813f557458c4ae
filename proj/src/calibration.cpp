#include "coreselect/calibration.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace coreselect {
namespace {

constexpr int kMaxSeriesIters = 500;
constexpr double kSeriesEps = 1e-16;

// Regularized lower incomplete gamma P(a, x) by power series; converges
// fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxSeriesIters; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kSeriesEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by modified Lentz continued
// fraction; converges fast for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / kSeriesEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxSeriesIters; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kSeriesEps) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double chi2_pdf(double x, int d) {
  if (x <= 0.0) return 0.0;
  const double a = 0.5 * d;
  return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) -
                  std::lgamma(a));
}

void check_dims(int d) {
  if (d < 1) throw std::invalid_argument("degrees of freedom must be >= 1");
}

}  // namespace

double chi2_cdf(double x, int d) {
  check_dims(d);
  if (std::isnan(x)) throw std::invalid_argument("chi2_cdf: x is NaN");
  if (x <= 0.0) return 0.0;
  const double a = 0.5 * d;
  const double half_x = 0.5 * x;
  if (half_x < a + 1.0) return gamma_p_series(a, half_x);
  return 1.0 - gamma_q_cf(a, half_x);
}

double chi2_inv_cdf(double p, int d) {
  check_dims(d);
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::invalid_argument("chi2_inv_cdf: p must lie in [0, 1)");
  }
  if (p == 0.0) return 0.0;

  double lo = 0.0;
  double hi = d + 10.0 * std::sqrt(2.0 * d) + 10.0;
  while (chi2_cdf(hi, d) < p) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, d) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  // One Newton step sharpens the bisection estimate where the pdf allows.
  const double pdf = chi2_pdf(x, d);
  if (pdf > 0.0) {
    const double step = (chi2_cdf(x, d) - p) / pdf;
    const double refined = x - step;
    if (refined > 0.0 && std::isfinite(refined)) x = refined;
  }
  return x;
}

double min_feasible_delta(double epsilon, int window_n, int dims,
                          double sigma2) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  }
  if (window_n < 1) throw std::invalid_argument("window_n must be >= 1");
  if (sigma2 < 0.0) throw std::invalid_argument("sigma2 must be >= 0");
  check_dims(dims);
  const double p = std::pow(1.0 - epsilon, 1.0 / window_n);
  return std::sqrt(2.0 * sigma2 * chi2_inv_cdf(p, dims));
}

RunRadii derive_radii(const CalibrationConfig& config) {
  if (!(config.delta > 0.0)) {
    throw std::invalid_argument("delta must be > 0");
  }
  if (!(config.epsilon > 0.0 && config.epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  }
  if (config.window_n < 1) {
    throw std::invalid_argument("window_n must be >= 1");
  }
  if (config.sigma2 < 0.0) throw std::invalid_argument("sigma2 must be >= 0");
  check_dims(config.dims);

  const double p = std::pow(1.0 - config.epsilon, 1.0 / config.window_n);
  const double q = chi2_inv_cdf(p, config.dims);
  RunRadii radii;
  radii.delta0 = config.delta - std::sqrt(config.sigma2 * q);
  radii.delta1 = config.delta - std::sqrt(2.0 * config.sigma2 * q);
  if (radii.delta1 < 0.0) {
    std::ostringstream msg;
    msg << "coverage radius " << config.delta
        << " is below the smallest feasible radius "
        << std::sqrt(2.0 * config.sigma2 * q) << " for sigma2="
        << config.sigma2 << ", epsilon=" << config.epsilon << ", n="
        << config.window_n << ", d=" << config.dims;
    throw InfeasibleConfigError(msg.str());
  }
  return radii;
}

double corollary_radius(double delta, double sigma1_sq, double epsilon,
                        int dims) {
  if (sigma1_sq < 0.0) throw std::invalid_argument("sigma1_sq must be >= 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  }
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  check_dims(dims);
  const double shrink =
      std::sqrt(sigma1_sq * chi2_inv_cdf(1.0 - epsilon, dims));
  const double radius = delta - shrink;
  if (radius < 0.0) {
    std::ostringstream msg;
    msg << "coverage radius " << delta
        << " is below the single-step error allowance " << shrink;
    throw InfeasibleConfigError(msg.str());
  }
  return radius;
}

}  // namespace coreselect
