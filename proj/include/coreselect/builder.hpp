#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "coreselect/calibration.hpp"
#include "coreselect/cover.hpp"
#include "coreselect/geometry.hpp"
#include "coreselect/sample.hpp"

namespace coreselect {

// Outcome of one prediction window: which epochs to collect, plus the
// representative chosen for every prediction in the window.
struct WindowDecision {
  std::vector<std::int64_t> collect_epochs;  // ascending
  CoverageAssignment assignment;
};

// Online selection loop. Per window: predictions already representable by
// a collected sample within delta0 (weight below capacity) bump that
// sample's weight; the rest become a cover problem at delta1 whose picks
// are the epochs to collect. Collected samples enter with weight equal to
// their solver load.
//
// Protocol per window: process_window(predictions) then ingest_collected
// with exactly the samples for the returned collect_epochs (possibly
// none). Single-owner mutable; not thread-safe.
class CoresetBuilder {
 public:
  explicit CoresetBuilder(const CalibrationConfig& config,
                          std::size_t exact_limit = kDefaultExactLimit);

  // Bypasses calibration and runs with the given radii as-is (sweep
  // cells); either radius may be infinite.
  CoresetBuilder(const CalibrationConfig& config, const RunRadii& radii,
                 std::size_t exact_limit = kDefaultExactLimit);

  // Installs the initial collected samples (weight 1 each); allowed only
  // before the first window.
  void seed(const std::vector<Sample>& initial);

  // Runs one window over predictions in ascending epoch order. Mutates
  // weights of covering entries immediately; the collect decision stays
  // pending until ingest_collected.
  WindowDecision process_window(const std::vector<Sample>& predictions);

  // Delivers the actual samples for the pending decision; epochs must
  // equal the decision's collect_epochs exactly.
  void ingest_collected(const std::vector<Sample>& actuals);

  // Single-step policy: collect iff every collected sample is strictly
  // farther than delta0 (an empty set always collects). Requires the
  // window length 1, unbounded capacity configuration; const, so callers
  // can compare it against process_window on the same state.
  bool threshold_decide(const Eigen::VectorXd& prediction) const;

  // Returns the weighted coreset; no window may be mid-flight.
  WeightedCoreset finalize() const;

  const CalibrationConfig& config() const { return config_; }
  const RunRadii& radii() const { return radii_; }
  std::int64_t window_index() const { return window_index_; }
  bool window_pending() const { return pending_.has_value(); }
  const WeightedCoreset& collected() const { return collected_; }

 private:
  struct PendingWindow {
    std::vector<std::int64_t> epochs;
    std::vector<std::uint32_t> loads;
  };

  // Nearest entry whose weight still admits another assignment; kNoEntry
  // when none qualifies. Ties break toward the smallest entry id.
  std::size_t nearest_eligible(const Eigen::VectorXd& prediction,
                               double* dist_out) const;
  void append_entry(const Sample& sample, std::uint32_t weight,
                    EntryOrigin origin);

  CalibrationConfig config_;
  RunRadii radii_;
  std::size_t exact_limit_;
  WeightedCoreset collected_;
  NearestNeighborIndex index_;
  std::int64_t window_index_ = 0;
  std::optional<PendingWindow> pending_;
};

}  // namespace coreselect
