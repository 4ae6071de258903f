#pragma once

#include "pcup/assignment.hpp"
#include "pcup/geometry.hpp"

namespace pcup {

/// Sum over both directions of squared nearest-neighbour distances.
double chamfer_sum(const Points3& a, const Points3& b);

/// chamfer_sum divided by (|a| + |b|); the reported "Chamfer loss".
double chamfer_loss(const Points3& a, const Points3& b);

/// d chamfer_sum / d a with nearest-neighbour assignments held fixed.
Points3 chamfer_gradient(const Points3& a, const Points3& b);

struct ChamferEvaluation {
  double sum = 0.0;
  Points3 gradient;  // with respect to the first argument
};

/// Both the value and the gradient from one pair of nearest-neighbour sweeps.
ChamferEvaluation chamfer_with_gradient(const Points3& a, const Points3& b);

/// Optimal bijection minimising total Euclidean (not squared) distance.
Assignment emd_assignment(const Points3& a, const Points3& b);
double emd(const Points3& a, const Points3& b);

/// Fraction of `pred` points within `rho` of some `gt` point.
double accuracy(const Points3& pred, const Points3& gt, double rho);

/// Fraction of `gt` points within `rho` of some `pred` point.
double coverage(const Points3& pred, const Points3& gt, double rho);

}  // namespace pcup
