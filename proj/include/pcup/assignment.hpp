#pragma once

#include <vector>

#include "pcup/geometry.hpp"

namespace pcup {

/// Bijection between two equal-size index sets: target[i] is the column matched to row i.
struct Assignment {
  std::vector<Eigen::Index> target;
  double cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix (shortest augmenting
/// path with dual potentials, O(n^3)). `cost` is the sum of the chosen entries.
Assignment solve_assignment(const RowMatrix& cost);

}  // namespace pcup
