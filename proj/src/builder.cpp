#include "coreselect/builder.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace coreselect {
namespace {

constexpr std::size_t kNoEntry = std::numeric_limits<std::size_t>::max();

void check_dims(const Eigen::VectorXd& features, int dims,
                const char* what) {
  if (features.size() != dims) {
    throw std::invalid_argument(std::string(what) +
                                ": feature dimension mismatch");
  }
}

}  // namespace

CoresetBuilder::CoresetBuilder(const CalibrationConfig& config,
                               std::size_t exact_limit)
    : config_(config), radii_(derive_radii(config)),
      exact_limit_(exact_limit) {}

CoresetBuilder::CoresetBuilder(const CalibrationConfig& config,
                               const RunRadii& radii,
                               std::size_t exact_limit)
    : config_(config), radii_(radii), exact_limit_(exact_limit) {
  if (std::isnan(radii.delta0) || std::isnan(radii.delta1) ||
      radii.delta0 < 0.0 || radii.delta1 < 0.0) {
    throw std::invalid_argument("radii must be >= 0");
  }
  if (config.window_n < 1) throw std::invalid_argument("window_n must be >= 1");
  if (config.dims < 1) throw std::invalid_argument("dims must be >= 1");
}

void CoresetBuilder::append_entry(const Sample& sample, std::uint32_t weight,
                                  EntryOrigin origin) {
  collected_.entries.push_back(CoresetEntry{sample, weight, origin});
  index_.insert(sample.features);
}

void CoresetBuilder::seed(const std::vector<Sample>& initial) {
  if (window_index_ > 0 || pending_.has_value()) {
    throw std::logic_error("seed is only allowed before the first window");
  }
  for (const Sample& sample : initial) {
    check_dims(sample.features, config_.dims, "seed");
    append_entry(sample, 1, EntryOrigin{});
  }
  collected_.total_candidates += initial.size();
}

std::size_t CoresetBuilder::nearest_eligible(
    const Eigen::VectorXd& prediction, double* dist_out) const {
  if (!config_.kappa.finite()) {
    if (collected_.entries.empty()) return kNoEntry;
    const NearestNeighbor nn = index_.nearest(prediction);
    *dist_out = nn.dist;
    return nn.index;
  }
  std::size_t best = kNoEntry;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < collected_.entries.size(); ++i) {
    const CoresetEntry& entry = collected_.entries[i];
    if (!config_.kappa.admits(entry.weight)) continue;
    const double d2 = squared_distance(prediction, entry.sample.features);
    if (d2 < best_d2) {
      best = i;
      best_d2 = d2;
    }
  }
  if (best != kNoEntry) *dist_out = std::sqrt(best_d2);
  return best;
}

WindowDecision CoresetBuilder::process_window(
    const std::vector<Sample>& predictions) {
  if (pending_.has_value()) {
    throw std::logic_error("previous window has not been ingested");
  }
  if (predictions.size() != static_cast<std::size_t>(config_.window_n)) {
    throw std::invalid_argument("window length mismatch");
  }
  const std::size_t n = predictions.size();
  for (std::size_t i = 0; i < n; ++i) {
    check_dims(predictions[i].features, config_.dims, "process_window");
    if (i > 0 && predictions[i].epoch <= predictions[i - 1].epoch) {
      throw std::invalid_argument(
          "prediction epochs must be strictly ascending");
    }
  }

  std::vector<AssignmentRecord> records(n);
  std::vector<std::size_t> uncovered;
  for (std::size_t i = 0; i < n; ++i) {
    double dist = 0.0;
    const std::size_t entry = nearest_eligible(predictions[i].features, &dist);
    if (entry != kNoEntry && within_radius(dist, radii_.delta0)) {
      ++collected_.entries[entry].weight;
      records[i] = AssignmentRecord{predictions[i].epoch, entry,
                                    RepresentativeKind::Existing, dist};
    } else {
      uncovered.push_back(i);
    }
  }

  CoverInstance instance;
  instance.candidates.reserve(n);
  for (const Sample& p : predictions) instance.candidates.push_back(p.features);
  instance.targets = uncovered;
  instance.radius = radii_.delta1;
  instance.capacity = config_.kappa;
  const CoverSolution solution = solve_cover(instance, exact_limit_);

  const std::size_t base = collected_.entries.size();
  std::vector<std::size_t> rank_of(n, kNoEntry);
  for (std::size_t r = 0; r < solution.selected.size(); ++r) {
    rank_of[solution.selected[r]] = r;
  }
  for (std::size_t k = 0; k < uncovered.size(); ++k) {
    const std::size_t i = uncovered[k];
    const std::size_t j = solution.assignment[k];
    records[i] = AssignmentRecord{
        predictions[i].epoch, base + rank_of[j], RepresentativeKind::New,
        distance(predictions[i].features, predictions[j].features)};
  }

  WindowDecision decision;
  decision.collect_epochs.reserve(solution.selected.size());
  for (const std::size_t j : solution.selected) {
    decision.collect_epochs.push_back(predictions[j].epoch);
  }
  decision.assignment.pairs = std::move(records);
  pending_ = PendingWindow{decision.collect_epochs, solution.loads};
  return decision;
}

void CoresetBuilder::ingest_collected(const std::vector<Sample>& actuals) {
  if (!pending_.has_value()) {
    throw std::logic_error("no pending window to ingest");
  }
  if (actuals.size() != pending_->epochs.size()) {
    throw std::invalid_argument(
        "collection protocol violated: sample count mismatch");
  }
  for (std::size_t k = 0; k < actuals.size(); ++k) {
    check_dims(actuals[k].features, config_.dims, "ingest_collected");
    if (actuals[k].epoch != pending_->epochs[k]) {
      throw std::invalid_argument(
          "collection protocol violated: epoch mismatch");
    }
  }
  for (std::size_t k = 0; k < actuals.size(); ++k) {
    append_entry(actuals[k], pending_->loads[k],
                 EntryOrigin{window_index_});
  }
  collected_.total_candidates += static_cast<std::uint64_t>(config_.window_n);
  ++window_index_;
  pending_.reset();
}

bool CoresetBuilder::threshold_decide(const Eigen::VectorXd& prediction) const {
  if (config_.window_n != 1) {
    throw std::invalid_argument("threshold policy requires window length 1");
  }
  if (config_.kappa.finite()) {
    throw std::invalid_argument("threshold policy requires unbounded capacity");
  }
  check_dims(prediction, config_.dims, "threshold_decide");
  if (collected_.entries.empty()) return true;
  return index_.nearest(prediction).dist > radii_.delta0;
}

WeightedCoreset CoresetBuilder::finalize() const {
  if (pending_.has_value()) {
    throw std::logic_error("cannot finalize with a window mid-flight");
  }
  return collected_;
}

}  // namespace coreselect
