#include "pcup/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "pcup/error.hpp"

namespace pcup {
namespace {
constexpr std::uint32_t kLeafSize = 12;
}

NearestNeighborIndex::NearestNeighborIndex(Points3 points) : points_(std::move(points)) {
  if (points_.rows() == 0) throw Error(ErrorCode::EmptySet, "cannot index an empty point set");
  if (!points_.allFinite()) throw Error(ErrorCode::NumericFailure, "cannot index non-finite points");
  order_.resize(static_cast<std::size_t>(points_.rows()));
  std::iota(order_.begin(), order_.end(), 0u);
  const auto n = static_cast<std::uint32_t>(order_.size());
  if (points_.rows() < kBruteForceBelow) {
    nodes_.push_back(Node{0, n, -1, -1, 0, 0.0});
  } else {
    nodes_.reserve(2 * n / kLeafSize + 1);
    build(0, n);
  }
}

std::int32_t NearestNeighborIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end, -1, -1, 0, 0.0});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (auto i = begin; i < end; ++i) {
    const Vec3 p = points_.row(order_[i]).transpose();
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] - lo[axis] <= 0.0) return id;  // all points coincide

  const auto mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_(a, axis) < points_(b, axis);
                   });
  const double split = points_(order_[mid], axis);
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void NearestNeighborIndex::search(std::int32_t id, const Vec3& q, Hit& best) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.left < 0) {
    for (auto i = node.begin; i < node.end; ++i) {
      const auto idx = static_cast<Eigen::Index>(order_[i]);
      const double d = (points_.row(idx).transpose() - q).squaredNorm();
      if (d < best.squared_distance || (d == best.squared_distance && idx < best.index)) {
        best.squared_distance = d;
        best.index = idx;
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const auto near = diff < 0.0 ? node.left : node.right;
  const auto far = diff < 0.0 ? node.right : node.left;
  search(near, q, best);
  // <= keeps equidistant points on the far side eligible for the lowest-index tie rule.
  if (diff * diff <= best.squared_distance) search(far, q, best);
}

NearestNeighborIndex::Hit NearestNeighborIndex::nearest(const Vec3& query) const {
  Hit best{std::numeric_limits<Eigen::Index>::max(), std::numeric_limits<double>::infinity()};
  search(0, query, best);
  return best;
}

}  // namespace pcup
