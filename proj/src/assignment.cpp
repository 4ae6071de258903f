#include "pcup/assignment.hpp"

#include <limits>

#include "pcup/error.hpp"

namespace pcup {

Assignment solve_assignment(const RowMatrix& cost) {
  const Eigen::Index n = cost.rows();
  if (n != cost.cols()) throw Error(ErrorCode::SizeMismatch, "assignment needs a square matrix");
  if (n == 0) throw Error(ErrorCode::EmptySet, "assignment over empty sets");
  if (!cost.allFinite()) throw Error(ErrorCode::InvalidArgument, "assignment costs must be finite");

  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), min_slack(n + 1);
  std::vector<Eigen::Index> row_of(n + 1, 0), prev(n + 1, 0);
  std::vector<char> used(n + 1);

  for (Eigen::Index i = 1; i <= n; ++i) {
    row_of[0] = i;
    Eigen::Index col = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col] = 1;
      const Eigen::Index row = row_of[col];
      double delta = inf;
      Eigen::Index next = 0;
      for (Eigen::Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double slack = cost(row - 1, j - 1) - u[row] - v[j];
        if (slack < min_slack[j]) {
          min_slack[j] = slack;
          prev[j] = col;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          next = j;
        }
      }
      for (Eigen::Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      col = next;
    } while (row_of[col] != 0);
    do {
      const Eigen::Index p = prev[col];
      row_of[col] = row_of[p];
      col = p;
    } while (col != 0);
  }

  Assignment result;
  result.target.assign(static_cast<std::size_t>(n), -1);
  for (Eigen::Index j = 1; j <= n; ++j) result.target[row_of[j] - 1] = j - 1;
  for (Eigen::Index i = 0; i < n; ++i) result.cost += cost(i, result.target[i]);
  return result;
}

}  // namespace pcup
