#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace coreselect {

// Malformed or inconsistent input data; messages carry file:line context.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// An evenly spaced feature stream. The leading fit_count epochs are the
// forecaster-fit range; the rest is the selection range. Epochs are
// strictly increasing but need not be contiguous.
struct StreamDataset {
  std::vector<std::int64_t> epochs;
  std::vector<Eigen::VectorXd> features;
  std::optional<std::vector<int>> labels;  // class ids in {1..C}
  int dims = 0;
  std::size_t fit_count = 0;

  std::size_t size() const { return epochs.size(); }
  std::size_t selection_size() const { return epochs.size() - fit_count; }
  int num_classes() const;  // max label; 0 when unlabeled
};

// CSV layout: header row, then one epoch per row. Columns: epoch, d
// feature columns, optionally a final column named "label". Missing or
// non-finite values are rejected with file:line context.
StreamDataset parse_csv(std::istream& in, const std::string& name);
StreamDataset read_csv(const std::string& path);
void write_csv(const StreamDataset& dataset, std::ostream& out);
void write_csv_file(const StreamDataset& dataset, const std::string& path);

// Labeled synthetic stream: class-share-stratified dwell blocks in a
// shuffled order, each block hovering near its class's cluster center.
// Class shares are exact up to rounding, so rare classes always appear.
struct RegimeStreamSpec {
  std::size_t length = 2000;
  int dims = 2;
  std::uint64_t seed = 1;
  std::vector<double> class_shares = {0.75, 0.22, 0.02, 0.01};
  double spread = 10.0;  // distance scale between cluster centers
  double jitter = 0.1;   // within-block noise stddev per coordinate
  int min_dwell = 20;
  int max_dwell = 60;
};
StreamDataset make_regime_stream(const RegimeStreamSpec& spec);

// Unlabeled Gaussian random walk starting at the origin.
StreamDataset make_random_walk(std::size_t length, int dims,
                               double step_sigma, std::uint64_t seed);

}  // namespace coreselect
