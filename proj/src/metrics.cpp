#include "pcup/metrics.hpp"

#include "pcup/error.hpp"
#include "pcup/kdtree.hpp"

namespace pcup {
namespace {

void require_nonempty(const Points3& a, const Points3& b) {
  if (a.rows() == 0 || b.rows() == 0) throw Error(ErrorCode::EmptySet, "point set is empty");
  if (!a.allFinite() || !b.allFinite()) {
    throw Error(ErrorCode::NumericFailure, "point set has non-finite coordinates");
  }
}

// Nearest neighbour in `target` of every row of `source`.
std::vector<NearestNeighborIndex::Hit> nearest_all(const Points3& source, const Points3& target) {
  const NearestNeighborIndex index(target);
  std::vector<NearestNeighborIndex::Hit> hits(static_cast<std::size_t>(source.rows()));
  for (Eigen::Index i = 0; i < source.rows(); ++i) {
    hits[static_cast<std::size_t>(i)] = index.nearest(source.row(i).transpose());
  }
  return hits;
}

double within_radius_fraction(const Points3& query, const Points3& reference, double rho) {
  if (!(rho > 0.0)) throw Error(ErrorCode::NonpositiveRadius, "radius must be positive");
  require_nonempty(query, reference);
  const double r2 = rho * rho;
  Eigen::Index hits = 0;
  for (const auto& h : nearest_all(query, reference)) hits += h.squared_distance <= r2 ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(query.rows());
}

}  // namespace

ChamferEvaluation chamfer_with_gradient(const Points3& a, const Points3& b) {
  require_nonempty(a, b);
  const auto a_to_b = nearest_all(a, b);
  const auto b_to_a = nearest_all(b, a);

  ChamferEvaluation out;
  out.gradient = Points3::Zero(a.rows(), 3);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const auto& h = a_to_b[static_cast<std::size_t>(i)];
    out.sum += h.squared_distance;
    out.gradient.row(i) += 2.0 * (a.row(i) - b.row(h.index));
  }
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    const auto& h = b_to_a[static_cast<std::size_t>(j)];
    out.sum += h.squared_distance;
    out.gradient.row(h.index) += 2.0 * (a.row(h.index) - b.row(j));
  }
  return out;
}

double chamfer_sum(const Points3& a, const Points3& b) {
  require_nonempty(a, b);
  double sum = 0.0;
  for (const auto& h : nearest_all(a, b)) sum += h.squared_distance;
  for (const auto& h : nearest_all(b, a)) sum += h.squared_distance;
  return sum;
}

double chamfer_loss(const Points3& a, const Points3& b) {
  return chamfer_sum(a, b) / static_cast<double>(a.rows() + b.rows());
}

Points3 chamfer_gradient(const Points3& a, const Points3& b) {
  return chamfer_with_gradient(a, b).gradient;
}

Assignment emd_assignment(const Points3& a, const Points3& b) {
  require_nonempty(a, b);
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::SizeMismatch, "EMD needs equal-size sets, got " +
                                             std::to_string(a.rows()) + " and " +
                                             std::to_string(b.rows()));
  }
  RowMatrix cost(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) cost(i, j) = (a.row(i) - b.row(j)).norm();
  }
  return solve_assignment(cost);
}

double emd(const Points3& a, const Points3& b) { return emd_assignment(a, b).cost; }

double accuracy(const Points3& pred, const Points3& gt, double rho) {
  return within_radius_fraction(pred, gt, rho);
}

double coverage(const Points3& pred, const Points3& gt, double rho) {
  return within_radius_fraction(gt, pred, rho);
}

}  // namespace pcup
