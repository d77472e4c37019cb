#pragma once

#include <Eigen/Core>
#include <vector>

namespace orelnav {

struct AssignmentResult {
  std::vector<int> row_to_col;  // -1 where the row is unassigned
  double total_cost{0.0};       // sum of cost over assigned pairs
};

// Optimal 1-to-1 minimum-cost assignment (Kuhn-Munkres, O(n^3)). Rectangular
// matrices are padded to square internally; surplus rows or columns come back
// unassigned, and the reported cost covers real pairs only.
AssignmentResult solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace orelnav
