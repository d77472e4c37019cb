#include "orelnav/assignment.hpp"

#include <limits>
#include <stdexcept>

namespace orelnav {

AssignmentResult solve_assignment(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  AssignmentResult result;
  result.row_to_col.assign(static_cast<size_t>(rows), -1);
  if (rows == 0 || cols == 0) return result;
  if (!cost.allFinite())
    throw std::invalid_argument("solve_assignment: non-finite cost entry");

  // Pad to square; dummy cells share one constant cost so padding never
  // changes which real pairs are optimal.
  const int n = std::max(rows, cols);
  const double pad = cost.cwiseAbs().maxCoeff() + 1.0;

  auto at = [&](int r, int c) -> double {
    return (r < rows && c < cols) ? cost(r, c) : pad;
  };

  // Shortest augmenting path formulation, 1-based internal indexing.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  for (int j = 1; j <= n; ++j) {
    const int i = p[j];
    if (i >= 1 && i <= rows && j <= cols) {
      result.row_to_col[static_cast<size_t>(i - 1)] = j - 1;
      result.total_cost += cost(i - 1, j - 1);
    }
  }
  return result;
}

}  // namespace orelnav
