#include "coreselect/forecasting.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace coreselect {
namespace {

constexpr double kEwAlpha = 0.1;
constexpr double kRidge = 1e-8;

void check_shape(int window_n, int dims) {
  if (window_n < 1) throw std::invalid_argument("window_n must be >= 1");
  if (dims < 1) throw std::invalid_argument("dims must be >= 1");
}

void check_sample(const Eigen::VectorXd& sample, int dims) {
  if (sample.size() != dims) {
    throw std::invalid_argument("observed sample has the wrong dimension");
  }
  if (!sample.allFinite()) {
    throw std::invalid_argument("observed sample must be finite");
  }
}

class PersistenceForecaster final : public Forecaster {
 public:
  PersistenceForecaster(int window_n, int dims)
      : window_n_(window_n), dims_(dims) {
    check_shape(window_n, dims);
  }

  void observe(const Eigen::VectorXd& sample) override {
    check_sample(sample, dims_);
    if (count_ > 0) {
      const Eigen::ArrayXd err = (sample - last_).array().square();
      if (count_ == 1) {
        ew_sq_err_ = err;
      } else {
        ew_sq_err_ = (1.0 - kEwAlpha) * ew_sq_err_ + kEwAlpha * err;
      }
    }
    last_ = sample;
    ++count_;
  }

  std::vector<Eigen::VectorXd> predict_window() override {
    if (count_ == 0) {
      throw std::logic_error("persistence forecast requires an observation");
    }
    return std::vector<Eigen::VectorXd>(window_n_, last_);
  }

  double mse_estimate() const override {
    return count_ < 2 ? 0.0 : ew_sq_err_.maxCoeff();
  }

  std::string name() const override { return "persistence"; }

 private:
  int window_n_;
  int dims_;
  std::uint64_t count_ = 0;
  Eigen::VectorXd last_;
  Eigen::ArrayXd ew_sq_err_;
};

class ArForecaster final : public Forecaster {
 public:
  ArForecaster(int order, int window_n, int dims)
      : order_(order), window_n_(window_n), dims_(dims) {
    check_shape(window_n, dims);
    if (order < 1) throw std::invalid_argument("AR order must be >= 1");
  }

  void observe(const Eigen::VectorXd& sample) override {
    check_sample(sample, dims_);
    history_.push_back(sample);
  }

  std::vector<Eigen::VectorXd> predict_window() override {
    const std::size_t p = static_cast<std::size_t>(order_);
    const std::size_t min_history = 11 * p;
    if (history_.size() < min_history) {
      throw std::logic_error("AR forecast requires at least 11*order samples");
    }
    fit();

    // Roll forward, feeding each prediction back as the newest lag.
    std::vector<Eigen::VectorXd> lags(p);
    for (std::size_t k = 0; k < p; ++k) {
      lags[k] = history_[history_.size() - 1 - k];
    }
    std::vector<Eigen::VectorXd> window;
    window.reserve(static_cast<std::size_t>(window_n_));
    for (int step = 0; step < window_n_; ++step) {
      Eigen::VectorXd next(dims_);
      for (int f = 0; f < dims_; ++f) {
        double value = coef_(p, f);  // intercept
        for (std::size_t k = 0; k < p; ++k) {
          value += coef_(k, f) * lags[k](f);
        }
        next(f) = value;
      }
      for (std::size_t k = p; k-- > 1;) lags[k] = lags[k - 1];
      lags[0] = next;
      window.push_back(std::move(next));
    }
    return window;
  }

  double mse_estimate() const override {
    return fitted_ ? fit_mse_ : 0.0;
  }

  std::string name() const override { return "ar"; }

 private:
  void fit() {
    const std::size_t p = static_cast<std::size_t>(order_);
    const std::size_t rows = history_.size() - p;
    const std::size_t cols = p + 1;
    Eigen::MatrixXd x(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      x(r, cols - 1) = 1.0;
    }
    coef_.resize(cols, dims_);
    fit_mse_ = 0.0;
    Eigen::VectorXd y(rows);
    for (int f = 0; f < dims_; ++f) {
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = p + r;
        y(r) = history_[t](f);
        for (std::size_t k = 0; k < p; ++k) {
          x(r, k) = history_[t - 1 - k](f);
        }
      }
      Eigen::MatrixXd gram = x.transpose() * x;
      gram.diagonal().array() += kRidge;
      const Eigen::VectorXd c = gram.ldlt().solve(x.transpose() * y);
      coef_.col(f) = c;
      const double mse = (x * c - y).squaredNorm() / static_cast<double>(rows);
      fit_mse_ = std::max(fit_mse_, mse);
    }
    fitted_ = true;
  }

  int order_;
  int window_n_;
  int dims_;
  std::vector<Eigen::VectorXd> history_;
  Eigen::MatrixXd coef_;  // (order+1) x dims, last row is the intercept
  double fit_mse_ = 0.0;
  bool fitted_ = false;
};

class GaussianOracleForecaster final : public Forecaster {
 public:
  GaussianOracleForecaster(std::vector<Eigen::VectorXd> truth, double sigma2,
                           std::uint64_t seed, int window_n, int dims)
      : truth_(std::move(truth)), sigma2_(sigma2),
        sigma_(std::sqrt(sigma2)), rng_(seed), window_n_(window_n),
        dims_(dims) {
    check_shape(window_n, dims);
    if (sigma2 < 0.0) throw std::invalid_argument("sigma2 must be >= 0");
    for (const Eigen::VectorXd& x : truth_) check_sample(x, dims);
  }

  void observe(const Eigen::VectorXd& sample) override {
    check_sample(sample, dims_);
    if (cursor_ >= truth_.size()) {
      throw std::logic_error("oracle observed past the end of its stream");
    }
    ++cursor_;
  }

  std::vector<Eigen::VectorXd> predict_window() override {
    if (cursor_ + static_cast<std::size_t>(window_n_) > truth_.size()) {
      throw std::logic_error("oracle stream exhausted");
    }
    std::vector<Eigen::VectorXd> window;
    window.reserve(static_cast<std::size_t>(window_n_));
    for (int i = 0; i < window_n_; ++i) {
      Eigen::VectorXd pred = truth_[cursor_ + static_cast<std::size_t>(i)];
      for (int c = 0; c < dims_; ++c) {
        pred(c) -= rng_.normal(0.0, sigma_);
      }
      window.push_back(std::move(pred));
    }
    return window;
  }

  double mse_estimate() const override { return sigma2_; }

  std::string name() const override { return "oracle"; }

 private:
  std::vector<Eigen::VectorXd> truth_;
  double sigma2_;
  double sigma_;
  Rng rng_;
  int window_n_;
  int dims_;
  std::size_t cursor_ = 0;
};

}  // namespace

std::unique_ptr<Forecaster> persistence_forecaster(int window_n, int dims) {
  return std::make_unique<PersistenceForecaster>(window_n, dims);
}

std::unique_ptr<Forecaster> ar_forecaster(int order, int window_n, int dims) {
  return std::make_unique<ArForecaster>(order, window_n, dims);
}

std::unique_ptr<Forecaster> gaussian_oracle_forecaster(
    std::vector<Eigen::VectorXd> truth, double sigma2, std::uint64_t seed,
    int window_n, int dims) {
  return std::make_unique<GaussianOracleForecaster>(std::move(truth), sigma2,
                                                    seed, window_n, dims);
}

double nrmse(const std::vector<double>& predicted,
             const std::vector<double>& truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("nrmse: length mismatch");
  }
  if (truth.empty()) throw std::invalid_argument("nrmse: empty series");
  double mean = 0.0;
  for (const double t : truth) mean += t;
  mean /= static_cast<double>(truth.size());
  if (mean == 0.0) {
    throw std::invalid_argument("nrmse: true series has zero mean");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = predicted[i] - truth[i];
    sq += e * e;
  }
  return std::sqrt(sq / static_cast<double>(truth.size())) / std::abs(mean);
}

Eigen::VectorXd nrmse_per_attribute(
    const std::vector<Eigen::VectorXd>& predicted,
    const std::vector<Eigen::VectorXd>& truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("nrmse: length mismatch");
  }
  if (truth.empty()) throw std::invalid_argument("nrmse: empty series");
  const Eigen::Index dims = truth.front().size();
  Eigen::VectorXd out(dims);
  std::vector<double> p(truth.size());
  std::vector<double> t(truth.size());
  for (Eigen::Index f = 0; f < dims; ++f) {
    for (std::size_t i = 0; i < truth.size(); ++i) {
      p[i] = predicted[i](f);
      t[i] = truth[i](f);
    }
    out(f) = nrmse(p, t);
  }
  return out;
}

}  // namespace coreselect
