#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coreselect/builder.hpp"
#include "coreselect/dataset.hpp"
#include "coreselect/error_bound.hpp"
#include "coreselect/forecasting.hpp"

namespace coreselect {

enum class BaselineKind { Random, KCenter };

// Full experiment configuration. calibration.sigma2 is used verbatim when
// sigma2_fixed, otherwise replaced by the forecaster's estimate after the
// fit range. explicit_radii bypasses calibration entirely (sweep cells).
struct PipelineConfig {
  CalibrationConfig calibration;
  bool sigma2_fixed = false;
  std::optional<RunRadii> explicit_radii;
  std::size_t exact_limit = kDefaultExactLimit;
  bool normalize = true;   // z-score fit on the fit range
  std::size_t seed_windows = 1;  // leading selection windows collected whole
  std::uint64_t seed = 1;
  BoundParams bound;  // bound.n is overwritten with the run's candidate count
  std::vector<BaselineKind> baselines;
};

struct ClassDistribution {
  std::vector<std::uint64_t> counts;  // class c at index c-1
  // max/min class share; absent when the selection is empty or some class
  // was never selected (infinite skew).
  std::optional<double> skew_ratio;
};

struct CoverageStats {
  std::vector<bool> per_window;
  double fraction = 1.0;  // 1.0 when there are no windows
};

struct BaselineReport {
  std::string kind;
  bool cost_unaware = true;  // baselines see true samples, not forecasts
  std::vector<std::int64_t> selected_epochs;
  double sampling_ratio = 0.0;
  std::optional<int> per_window_k;  // k-center only
  std::optional<ClassDistribution> classes;
};

struct RunReport {
  std::uint64_t total_candidates = 0;
  std::size_t coreset_size = 0;
  std::vector<std::int64_t> selected_epochs;  // entry order
  std::vector<std::uint32_t> weights;         // entry order
  double weight_norm_value = 0.0;
  double sampling_ratio = 0.0;
  std::size_t windows_processed = 0;
  std::size_t dropped_trailing = 0;
  CoverageStats coverage;
  std::optional<ClassDistribution> classes;
  BoundTerms bound;
  double nu_value = 0.0;
  double objective = 0.0;
  std::string forecaster_name;
  double sigma2_used = 0.0;
  RunRadii radii;
  std::vector<double> forecast_nrmse;  // per attribute; NaN when undefined
  std::vector<BaselineReport> baselines;
  PipelineConfig config;
};

// Streams the dataset's selection range through forecaster + builder:
// seed_windows full windows seed the coreset, then per window the
// forecaster predicts, the builder decides, and only collected epochs'
// true values are revealed (unselected epochs feed the forecaster their
// predicted values). Trailing epochs short of a window are dropped and
// counted. Deterministic given dataset, config, and seeds.
RunReport run_pipeline(const StreamDataset& dataset, Forecaster& forecaster,
                       const PipelineConfig& config);

// Marks a window covered iff every candidate's true value lies within
// delta of its representative's collected (true) value.
CoverageStats coverage_check(
    const std::vector<CoverageAssignment>& window_assignments,
    const WeightedCoreset& coreset, const std::vector<std::int64_t>& epochs,
    const std::vector<Eigen::VectorXd>& truth, double delta);

// Uniform sample without replacement of floor(ratio * N) positions from
// the selection range; sorted ascending, deterministic per seed.
std::vector<std::size_t> random_baseline(const StreamDataset& dataset,
                                         double ratio, std::uint64_t seed);

// Greedy farthest-point k-center on the true samples of each complete
// selection window: first pick is the window's first point, each next
// pick maximizes the distance to the picked set (ties toward the smaller
// index). Returns sorted positions.
std::vector<std::size_t> kcenter_window_baseline(const StreamDataset& dataset,
                                                 std::size_t window_n,
                                                 std::size_t k);

// Per-class selection counts (classes 1..num_classes) plus max/min share.
ClassDistribution class_distribution(const std::vector<std::size_t>& selected,
                                     const std::vector<int>& labels,
                                     int num_classes);

}  // namespace coreselect
