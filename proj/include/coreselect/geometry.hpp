#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "coreselect/sample.hpp"

namespace coreselect {

// l2 distance between two feature vectors. Throws on dimension mismatch.
template <typename DerivedA, typename DerivedB>
double distance(const Eigen::MatrixBase<DerivedA>& a,
                const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("distance: dimension mismatch");
  return (a - b).norm();
}

template <typename DerivedA, typename DerivedB>
double squared_distance(const Eigen::MatrixBase<DerivedA>& a,
                        const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("distance: dimension mismatch");
  return (a - b).squaredNorm();
}

// Coverage predicate used everywhere a radius comparison happens, so that
// the boundary convention (inclusive) cannot drift between modules.
inline bool within_radius(double dist, double radius) { return dist <= radius; }

struct NearestNeighbor {
  std::size_t index = 0;
  double dist = 0.0;
};

// Linear-scan nearest neighbor; ties break toward the smallest index.
NearestNeighbor nearest_neighbor_linear(const Eigen::VectorXd& query,
                                        std::span<const Eigen::VectorXd> points);

// True iff every point of `covered` lies within `delta` of some point of
// `covering` (inclusive boundary). Empty `covered` is vacuously covered.
bool is_delta_cover(std::span<const Eigen::VectorXd> covered,
                    std::span<const Eigen::VectorXd> covering, double delta);

// ||u~|| = sqrt(sum_j (u_j / total_candidates)^2).
double weight_norm(const WeightedCoreset& coreset);

// Exact nearest-neighbor index over an append-only point set. Internally an
// axis-aligned splitting tree over a snapshot plus a linear tail; the tree is
// rebuilt once the tail reaches the snapshot size. Results are contractually
// identical to nearest_neighbor_linear, including the tie rule.
class NearestNeighborIndex {
 public:
  NearestNeighborIndex() = default;

  void insert(Eigen::VectorXd point);
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Eigen::VectorXd& point(std::size_t i) const { return points_[i]; }

  // Requires a nonempty index.
  NearestNeighbor nearest(const Eigen::VectorXd& query) const;

 private:
  struct Node {
    int axis = -1;             // -1 marks a leaf
    double split = 0.0;
    std::size_t left = 0;      // children into nodes_
    std::size_t right = 0;
    std::vector<std::size_t> bucket;  // point ids, leaves only
  };

  void rebuild();
  std::size_t build_node(std::vector<std::size_t>& ids, std::size_t begin,
                         std::size_t end, int depth);
  void search(std::size_t node, const Eigen::VectorXd& query,
              NearestNeighbor& best) const;
  static bool better(double d2, std::size_t idx, const NearestNeighbor& best);

  std::vector<Eigen::VectorXd> points_;
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
  std::size_t tree_size_ = 0;  // points_[0..tree_size_) are in the tree
};

// Per-feature z-score scaling fit on a history prefix. Constant features get
// unit scale so they pass through unchanged.
class FeatureScaler {
 public:
  static FeatureScaler fit(const Eigen::MatrixXd& rows);
  static FeatureScaler identity(Eigen::Index dims);

  Eigen::VectorXd transform(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd transform_rows(const Eigen::MatrixXd& rows) const;

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& scale() const { return scale_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;
};

}  // namespace coreselect
