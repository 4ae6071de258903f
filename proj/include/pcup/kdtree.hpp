#pragma once

#include <cstdint>
#include <vector>

#include "pcup/geometry.hpp"

namespace pcup {

/// Exact nearest-neighbour index over a fixed set of 3-d points.
///
/// A static median-split tree; clouds under kBruteForceBelow points are kept in a
/// single leaf and scanned linearly. Ties are resolved toward the lowest point index,
/// so results match a brute-force scan exactly.
class NearestNeighborIndex {
 public:
  static constexpr Eigen::Index kBruteForceBelow = 64;

  struct Hit {
    Eigen::Index index = -1;
    double squared_distance = 0.0;
  };

  explicit NearestNeighborIndex(Points3 points);

  Hit nearest(const Vec3& query) const;
  Eigen::Index size() const noexcept { return points_.rows(); }
  const Points3& points() const noexcept { return points_; }

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Vec3& q, Hit& best) const;

  Points3 points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace pcup
