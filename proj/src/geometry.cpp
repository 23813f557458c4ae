#include "coreselect/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace coreselect {

NearestNeighbor nearest_neighbor_linear(
    const Eigen::VectorXd& query, std::span<const Eigen::VectorXd> points) {
  if (points.empty())
    throw std::invalid_argument("nearest_neighbor: empty point set");
  NearestNeighbor best{0, squared_distance(query, points[0])};
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double d2 = squared_distance(query, points[i]);
    if (d2 < best.dist) best = {i, d2};
  }
  best.dist = std::sqrt(best.dist);
  return best;
}

bool is_delta_cover(std::span<const Eigen::VectorXd> covered,
                    std::span<const Eigen::VectorXd> covering, double delta) {
  if (delta < 0.0) throw std::invalid_argument("is_delta_cover: delta < 0");
  for (const auto& a : covered) {
    bool hit = false;
    for (const auto& b : covering) {
      if (within_radius(distance(a, b), delta)) {
        hit = true;
        break;
      }
    }
    if (!hit) return false;
  }
  return true;
}

double weight_norm(const WeightedCoreset& coreset) {
  if (coreset.total_candidates == 0)
    throw std::invalid_argument("weight_norm: no candidates");
  const double n = static_cast<double>(coreset.total_candidates);
  double sum = 0.0;
  for (const auto& e : coreset.entries) {
    const double w = static_cast<double>(e.weight) / n;
    sum += w * w;
  }
  return std::sqrt(sum);
}

void NearestNeighborIndex::insert(Eigen::VectorXd point) {
  points_.push_back(std::move(point));
  if (points_.size() - tree_size_ > std::max<std::size_t>(tree_size_, 8))
    rebuild();
}

bool NearestNeighborIndex::better(double d2, std::size_t idx,
                                  const NearestNeighbor& best) {
  return d2 < best.dist || (d2 == best.dist && idx < best.index);
}

NearestNeighbor NearestNeighborIndex::nearest(
    const Eigen::VectorXd& query) const {
  if (points_.empty())
    throw std::invalid_argument("nearest_neighbor: empty point set");
  NearestNeighbor best{points_.size(),
                       std::numeric_limits<double>::infinity()};
  if (tree_size_ > 0) search(root_, query, best);
  // Points appended after the last rebuild are scanned linearly.
  for (std::size_t i = tree_size_; i < points_.size(); ++i) {
    const double d2 = squared_distance(query, points_[i]);
    if (better(d2, i, best)) best = {i, d2};
  }
  best.dist = std::sqrt(best.dist);
  return best;
}

void NearestNeighborIndex::rebuild() {
  nodes_.clear();
  tree_size_ = points_.size();
  std::vector<std::size_t> ids(points_.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  root_ = build_node(ids, 0, ids.size(), 0);
}

std::size_t NearestNeighborIndex::build_node(std::vector<std::size_t>& ids,
                                             std::size_t begin,
                                             std::size_t end, int depth) {
  const std::size_t node_id = nodes_.size();
  nodes_.emplace_back();
  constexpr std::size_t kLeafSize = 16;
  if (end - begin <= kLeafSize) {
    nodes_[node_id].bucket.assign(ids.begin() + begin, ids.begin() + end);
    // Ascending ids inside a bucket make the tie rule fall out of scan order.
    std::sort(nodes_[node_id].bucket.begin(), nodes_[node_id].bucket.end());
    return node_id;
  }
  const int dims = static_cast<int>(points_[ids[begin]].size());
  const int axis = depth % dims;
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(ids.begin() + begin, ids.begin() + mid, ids.begin() + end,
                   [&](std::size_t a, std::size_t b) {
                     const double va = points_[a][axis], vb = points_[b][axis];
                     if (va != vb) return va < vb;
                     return a < b;
                   });
  const double split = points_[ids[mid]][axis];
  const std::size_t left = build_node(ids, begin, mid, depth + 1);
  const std::size_t right = build_node(ids, mid, end, depth + 1);
  nodes_[node_id].axis = axis;
  nodes_[node_id].split = split;
  nodes_[node_id].left = left;
  nodes_[node_id].right = right;
  return node_id;
}

void NearestNeighborIndex::search(std::size_t node_id,
                                  const Eigen::VectorXd& query,
                                  NearestNeighbor& best) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::size_t id : node.bucket) {
      const double d2 = squared_distance(query, points_[id]);
      if (better(d2, id, best)) best = {id, d2};
    }
    return;
  }
  const double diff = query[node.axis] - node.split;
  const std::size_t near = diff < 0.0 ? node.left : node.right;
  const std::size_t far = diff < 0.0 ? node.right : node.left;
  search(near, query, best);
  // The far side can still hold the smallest-index point at an equal
  // distance, so prune only strictly beyond the best radius.
  if (diff * diff <= best.dist) search(far, query, best);
}

FeatureScaler FeatureScaler::fit(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 1)
    throw std::invalid_argument("FeatureScaler: empty fit range");
  FeatureScaler s;
  s.mean_ = rows.colwise().mean();
  Eigen::VectorXd var =
      (rows.rowwise() - s.mean_.transpose()).array().square().colwise().sum() /
      static_cast<double>(rows.rows());
  s.scale_ = var.array().sqrt();
  for (Eigen::Index i = 0; i < s.scale_.size(); ++i)
    if (s.scale_[i] <= 0.0) s.scale_[i] = 1.0;
  return s;
}

FeatureScaler FeatureScaler::identity(Eigen::Index dims) {
  FeatureScaler s;
  s.mean_ = Eigen::VectorXd::Zero(dims);
  s.scale_ = Eigen::VectorXd::Ones(dims);
  return s;
}

Eigen::VectorXd FeatureScaler::transform(const Eigen::VectorXd& x) const {
  if (x.size() != mean_.size())
    throw std::invalid_argument("FeatureScaler: dimension mismatch");
  return (x - mean_).cwiseQuotient(scale_);
}

Eigen::MatrixXd FeatureScaler::transform_rows(const Eigen::MatrixXd& rows) const {
  Eigen::MatrixXd out = rows;
  out.rowwise() -= mean_.transpose();
  out.array().rowwise() /= scale_.transpose().array();
  return out;
}

}  // namespace coreselect
