#include "coreselect/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "coreselect/geometry.hpp"
#include "coreselect/rng.hpp"

namespace coreselect {
namespace {

std::size_t position_of_epoch(const std::vector<std::int64_t>& epochs,
                              std::int64_t epoch) {
  const auto it = std::lower_bound(epochs.begin(), epochs.end(), epoch);
  if (it == epochs.end() || *it != epoch) {
    throw std::invalid_argument("epoch not present in the dataset");
  }
  return static_cast<std::size_t>(it - epochs.begin());
}

FeatureScaler make_scaler(const StreamDataset& dataset,
                          const PipelineConfig& config) {
  if (!config.normalize || dataset.fit_count == 0) {
    return FeatureScaler::identity(dataset.dims);
  }
  Eigen::MatrixXd rows(dataset.fit_count, dataset.dims);
  for (std::size_t i = 0; i < dataset.fit_count; ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = dataset.features[i].transpose();
  }
  return FeatureScaler::fit(rows);
}

std::optional<ClassDistribution> classes_of_positions(
    const StreamDataset& dataset, const std::vector<std::size_t>& positions) {
  if (!dataset.labels.has_value()) return std::nullopt;
  return class_distribution(positions, *dataset.labels,
                            dataset.num_classes());
}

}  // namespace

CoverageStats coverage_check(
    const std::vector<CoverageAssignment>& window_assignments,
    const WeightedCoreset& coreset, const std::vector<std::int64_t>& epochs,
    const std::vector<Eigen::VectorXd>& truth, double delta) {
  if (epochs.size() != truth.size()) {
    throw std::invalid_argument("epochs and truth must be parallel");
  }
  CoverageStats stats;
  stats.per_window.reserve(window_assignments.size());
  std::size_t covered = 0;
  for (const CoverageAssignment& window : window_assignments) {
    bool all = true;
    for (const AssignmentRecord& record : window.pairs) {
      if (record.entry_id >= coreset.entries.size()) {
        throw std::invalid_argument(
            "assignment references an unresolvable representative");
      }
      const Eigen::VectorXd& rep =
          coreset.entries[record.entry_id].sample.features;
      const std::size_t pos = position_of_epoch(epochs,
                                                record.candidate_epoch);
      if (!within_radius(distance(truth[pos], rep), delta)) {
        all = false;
        break;
      }
    }
    stats.per_window.push_back(all);
    if (all) ++covered;
  }
  stats.fraction = window_assignments.empty()
                       ? 1.0
                       : static_cast<double>(covered) /
                             static_cast<double>(window_assignments.size());
  return stats;
}

std::vector<std::size_t> random_baseline(const StreamDataset& dataset,
                                         double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("ratio must lie in [0, 1]");
  }
  const std::size_t population = dataset.selection_size();
  const std::size_t count = static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(population)));
  std::vector<std::size_t> pool(population);
  for (std::size_t i = 0; i < population; ++i) pool[i] = dataset.fit_count + i;
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.uniform_below(population - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<std::size_t> kcenter_window_baseline(const StreamDataset& dataset,
                                                 std::size_t window_n,
                                                 std::size_t k) {
  if (window_n < 1) throw std::invalid_argument("window_n must be >= 1");
  if (k > window_n) {
    throw std::invalid_argument("per-window count k must be <= window_n");
  }
  std::vector<std::size_t> selected;
  for (std::size_t start = dataset.fit_count;
       start + window_n <= dataset.size(); start += window_n) {
    if (k == 0) continue;
    std::vector<std::size_t> picks;
    picks.reserve(k);
    std::vector<char> picked(window_n, 0);
    std::vector<double> min_dist(window_n,
                                 std::numeric_limits<double>::infinity());
    picks.push_back(0);
    picked[0] = 1;
    while (picks.size() < k) {
      const std::size_t last = picks.back();
      std::size_t far = window_n;
      double far_dist = -1.0;
      for (std::size_t i = 0; i < window_n; ++i) {
        min_dist[i] = std::min(
            min_dist[i], distance(dataset.features[start + i],
                                  dataset.features[start + last]));
        if (!picked[i] && min_dist[i] > far_dist) {
          far_dist = min_dist[i];
          far = i;
        }
      }
      picks.push_back(far);
      picked[far] = 1;
    }
    std::sort(picks.begin(), picks.end());
    for (const std::size_t i : picks) selected.push_back(start + i);
  }
  return selected;
}

ClassDistribution class_distribution(const std::vector<std::size_t>& selected,
                                     const std::vector<int>& labels,
                                     int num_classes) {
  if (labels.empty()) throw std::invalid_argument("labels are required");
  if (num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
  ClassDistribution dist;
  dist.counts.assign(static_cast<std::size_t>(num_classes), 0);
  for (const std::size_t pos : selected) {
    if (pos >= labels.size()) {
      throw std::invalid_argument("selected position outside the dataset");
    }
    const int label = labels[pos];
    if (label < 1 || label > num_classes) {
      throw std::invalid_argument("label outside {1..num_classes}");
    }
    ++dist.counts[static_cast<std::size_t>(label - 1)];
  }
  if (!selected.empty()) {
    const std::uint64_t max_count =
        *std::max_element(dist.counts.begin(), dist.counts.end());
    const std::uint64_t min_count =
        *std::min_element(dist.counts.begin(), dist.counts.end());
    if (min_count > 0) {
      dist.skew_ratio = static_cast<double>(max_count) /
                        static_cast<double>(min_count);
    }
  }
  return dist;
}

RunReport run_pipeline(const StreamDataset& dataset, Forecaster& forecaster,
                       const PipelineConfig& config) {
  const int dims = config.calibration.dims;
  const std::size_t n =
      static_cast<std::size_t>(config.calibration.window_n);
  if (dataset.dims != dims) {
    throw std::invalid_argument("dataset dimension does not match config");
  }
  if (dataset.fit_count > dataset.size()) {
    throw std::invalid_argument("fit range exceeds the dataset");
  }
  const std::size_t seed_count = config.seed_windows * n;
  if (dataset.selection_size() < seed_count + n) {
    throw DataError("selection range shorter than seeding plus one window");
  }

  const FeatureScaler scaler = make_scaler(dataset, config);
  std::vector<Eigen::VectorXd> truth;
  truth.reserve(dataset.size());
  for (const Eigen::VectorXd& x : dataset.features) {
    truth.push_back(scaler.transform(x));
  }

  for (std::size_t i = 0; i < dataset.fit_count; ++i) {
    forecaster.observe(truth[i]);
  }
  const double sigma2 = config.sigma2_fixed ? config.calibration.sigma2
                                            : forecaster.mse_estimate();
  CalibrationConfig calibration = config.calibration;
  calibration.sigma2 = sigma2;

  CoresetBuilder builder =
      config.explicit_radii.has_value()
          ? CoresetBuilder(calibration, *config.explicit_radii,
                           config.exact_limit)
          : CoresetBuilder(calibration, config.exact_limit);

  std::size_t pos = dataset.fit_count;
  std::vector<Sample> seed_samples;
  seed_samples.reserve(seed_count);
  for (std::size_t i = 0; i < seed_count; ++i, ++pos) {
    seed_samples.push_back(Sample{dataset.epochs[pos], truth[pos]});
    forecaster.observe(truth[pos]);
  }
  builder.seed(seed_samples);

  std::vector<CoverageAssignment> assignments;
  std::vector<Eigen::VectorXd> pred_series;
  std::vector<Eigen::VectorXd> true_series;
  while (pos + n <= dataset.size()) {
    const std::vector<Eigen::VectorXd> preds = forecaster.predict_window();
    std::vector<Sample> pred_samples;
    pred_samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred_samples.push_back(Sample{dataset.epochs[pos + i], preds[i]});
    }
    const WindowDecision decision = builder.process_window(pred_samples);

    std::vector<Sample> actuals;
    std::vector<char> is_selected(n, 0);
    actuals.reserve(decision.collect_epochs.size());
    for (const std::int64_t epoch : decision.collect_epochs) {
      const std::size_t p = position_of_epoch(dataset.epochs, epoch);
      actuals.push_back(Sample{epoch, truth[p]});
      is_selected[p - pos] = 1;
    }
    builder.ingest_collected(actuals);

    for (std::size_t i = 0; i < n; ++i) {
      forecaster.observe(is_selected[i] ? truth[pos + i] : preds[i]);
      pred_series.push_back(preds[i]);
      true_series.push_back(truth[pos + i]);
    }
    assignments.push_back(decision.assignment);
    pos += n;
  }

  const WeightedCoreset coreset = builder.finalize();

  RunReport report;
  report.total_candidates = coreset.total_candidates;
  report.coreset_size = coreset.entries.size();
  report.selected_epochs.reserve(coreset.entries.size());
  report.weights.reserve(coreset.entries.size());
  std::vector<std::size_t> selected_positions;
  selected_positions.reserve(coreset.entries.size());
  for (const CoresetEntry& entry : coreset.entries) {
    report.selected_epochs.push_back(entry.sample.epoch);
    report.weights.push_back(entry.weight);
    selected_positions.push_back(
        position_of_epoch(dataset.epochs, entry.sample.epoch));
  }
  report.weight_norm_value = weight_norm(coreset);
  report.sampling_ratio = static_cast<double>(coreset.entries.size()) /
                          static_cast<double>(coreset.total_candidates);
  report.windows_processed = assignments.size();
  report.dropped_trailing = dataset.size() - pos;
  report.coverage = coverage_check(assignments, coreset, dataset.epochs,
                                   truth, config.calibration.delta);
  report.classes = classes_of_positions(dataset, selected_positions);

  BoundParams bound_params = config.bound;
  bound_params.n = coreset.total_candidates;
  report.bound = bound_terms(coreset, config.calibration.delta, bound_params);
  report.nu_value = nu(bound_params);
  report.objective =
      coreset_objective(config.calibration.delta, coreset, report.nu_value);

  report.forecaster_name = forecaster.name();
  report.sigma2_used = sigma2;
  report.radii = builder.radii();

  report.forecast_nrmse.assign(static_cast<std::size_t>(dims),
                               std::numeric_limits<double>::quiet_NaN());
  if (!true_series.empty()) {
    std::vector<double> p(true_series.size());
    std::vector<double> t(true_series.size());
    for (int f = 0; f < dims; ++f) {
      for (std::size_t i = 0; i < true_series.size(); ++i) {
        p[i] = pred_series[i](f);
        t[i] = true_series[i](f);
      }
      try {
        report.forecast_nrmse[static_cast<std::size_t>(f)] = nrmse(p, t);
      } catch (const std::invalid_argument&) {
        // zero-mean attribute: normalizer undefined, leave NaN
      }
    }
  }

  for (const BaselineKind kind : config.baselines) {
    BaselineReport baseline;
    std::vector<std::size_t> positions;
    if (kind == BaselineKind::Random) {
      baseline.kind = "random";
      positions = random_baseline(dataset, report.sampling_ratio, config.seed);
    } else {
      baseline.kind = "kcenter";
      const std::size_t k = static_cast<std::size_t>(std::llround(
          report.sampling_ratio * static_cast<double>(n)));
      baseline.per_window_k = static_cast<int>(std::min(k, n));
      positions = kcenter_window_baseline(dataset, n, std::min(k, n));
    }
    baseline.selected_epochs.reserve(positions.size());
    for (const std::size_t p : positions) {
      baseline.selected_epochs.push_back(dataset.epochs[p]);
    }
    baseline.sampling_ratio = static_cast<double>(positions.size()) /
                              static_cast<double>(coreset.total_candidates);
    baseline.classes = classes_of_positions(dataset, positions);
    report.baselines.push_back(std::move(baseline));
  }

  report.config = config;
  return report;
}

}  // namespace coreselect
