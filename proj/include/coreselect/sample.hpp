#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace coreselect {

// One sampling epoch's feature vector. Epochs are unique within a stream.
struct Sample {
  std::int64_t epoch = 0;
  Eigen::VectorXd features;
};

// Per-point representation budget. A coreset point may stand in for at most
// kappa candidate samples; the unbounded case removes that constraint.
class Capacity {
 public:
  static Capacity bounded(std::uint32_t k) {
    if (k < 1) throw std::invalid_argument("capacity must be >= 1");
    return Capacity(k);
  }
  static Capacity unbounded() { return Capacity(kInfinite); }

  bool finite() const { return value_ != kInfinite; }
  std::uint32_t value() const {
    if (!finite()) throw std::logic_error("capacity is unbounded");
    return value_;
  }
  // True when a point carrying `load` representations may absorb one more.
  bool admits(std::uint32_t load) const { return !finite() || load < value_; }
  bool within(std::uint32_t load) const { return !finite() || load <= value_; }

  friend bool operator==(const Capacity&, const Capacity&) = default;

 private:
  static constexpr std::uint32_t kInfinite =
      std::numeric_limits<std::uint32_t>::max();
  explicit Capacity(std::uint32_t v) : value_(v) {}
  std::uint32_t value_;
};

// How an entry joined the coreset.
struct EntryOrigin {
  // Window index for window-collected entries; nullopt for the initial set.
  std::optional<std::int64_t> window;
  bool initial() const { return !window.has_value(); }
};

struct CoresetEntry {
  Sample sample;
  std::uint32_t weight = 1;  // multiplicity u_j, always >= 1
  EntryOrigin origin;
};

// Collected samples with multiplicity weights plus the size of the candidate
// stream they represent.
struct WeightedCoreset {
  std::vector<CoresetEntry> entries;
  std::uint64_t total_candidates = 0;

  std::uint64_t weight_sum() const {
    std::uint64_t s = 0;
    for (const auto& e : entries) s += e.weight;
    return s;
  }
};

enum class RepresentativeKind { Existing, New };

// One candidate epoch's representative: which coreset entry stands in for it
// and at which radius class the predicted-space match was made.
struct AssignmentRecord {
  std::int64_t candidate_epoch = 0;
  std::size_t entry_id = 0;  // index into WeightedCoreset::entries
  RepresentativeKind kind = RepresentativeKind::Existing;
  double predicted_distance = 0.0;
};

struct CoverageAssignment {
  std::vector<AssignmentRecord> pairs;
};

}  // namespace coreselect
