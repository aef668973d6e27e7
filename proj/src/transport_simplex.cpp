#include "transport_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace otra::detail {

namespace {

constexpr double kReducedCostTol = 1e-12;
constexpr int kDegenerateStreakForBland = 50;

struct BasisCell {
  int row;
  int col;
  double flow;
};

}  // namespace

Matrix solve_transport_lp(const Vector& a, const Vector& b,
                          const Matrix& cost) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  if (cost.rows() != n || cost.cols() != m) {
    throw std::invalid_argument("solve_transport_lp: cost shape mismatch");
  }

  // Northwest-corner initial basis: exactly n + m - 1 cells forming a
  // spanning tree of the bipartite row/column graph.
  std::vector<BasisCell> basis;
  basis.reserve(n + m - 1);
  {
    int i = 0;
    int j = 0;
    double ra = a(0);
    double rb = b(0);
    while (true) {
      const double alloc = std::max(0.0, std::min(ra, rb));
      basis.push_back(BasisCell{i, j, alloc});
      ra -= alloc;
      rb -= alloc;
      if (i == n - 1 && j == m - 1) break;
      if (ra <= 0.0 && i < n - 1) {
        ++i;
        ra = a(i);
      } else {
        ++j;
        rb = b(j);
      }
    }
  }

  std::vector<std::vector<int>> row_cells(n);
  std::vector<std::vector<int>> col_cells(m);
  Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic> in_basis(n, m);
  in_basis.setZero();
  for (int c = 0; c < static_cast<int>(basis.size()); ++c) {
    row_cells[basis[c].row].push_back(c);
    col_cells[basis[c].col].push_back(c);
    in_basis(basis[c].row, basis[c].col) = 1;
  }

  Vector u(n);
  Vector v(m);
  // Scratch for tree traversals. Nodes 0..n-1 are rows, n..n+m-1 columns.
  std::vector<int> stack;
  std::vector<int> parent_node(n + m);
  std::vector<int> parent_cell(n + m);
  std::vector<char> visited(n + m);

  const long long max_pivots = 50LL * n * m + 1000;
  bool bland = false;
  int degenerate_streak = 0;

  for (long long pivot = 0;; ++pivot) {
    if (pivot > max_pivots) {
      throw NumericError("solve_transport_lp: pivot budget exceeded");
    }

    // Duals from the tree: u(i) + v(j) = cost(i, j) on basic cells.
    std::fill(visited.begin(), visited.end(), 0);
    stack.clear();
    stack.push_back(0);
    visited[0] = 1;
    u(0) = 0.0;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      const bool is_row = node < n;
      const auto& cells = is_row ? row_cells[node] : col_cells[node - n];
      for (int c : cells) {
        const int other = is_row ? n + basis[c].col : basis[c].row;
        if (visited[other]) continue;
        visited[other] = 1;
        if (is_row) {
          v(basis[c].col) = cost(basis[c].row, basis[c].col) - u(node);
        } else {
          u(basis[c].row) = cost(basis[c].row, basis[c].col) - v(node - n);
        }
        stack.push_back(other);
      }
    }

    // Entering cell.
    int ei = -1;
    int ej = -1;
    double best = -kReducedCostTol;
    for (int i = 0; i < n && (ei < 0 || !bland); ++i) {
      const double ui = u(i);
      for (int j = 0; j < m; ++j) {
        if (in_basis(i, j)) continue;
        const double reduced = cost(i, j) - ui - v(j);
        if (reduced < best) {
          best = reduced;
          ei = i;
          ej = j;
          if (bland) break;  // first eligible cell in index order
        }
      }
    }
    if (ei < 0) break;  // optimal

    // Unique tree path from row node ei to column node n + ej.
    std::fill(visited.begin(), visited.end(), 0);
    stack.clear();
    stack.push_back(ei);
    visited[ei] = 1;
    parent_node[ei] = -1;
    const int target = n + ej;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      if (node == target) break;
      const bool is_row = node < n;
      const auto& cells = is_row ? row_cells[node] : col_cells[node - n];
      for (int c : cells) {
        const int other = is_row ? n + basis[c].col : basis[c].row;
        if (visited[other]) continue;
        visited[other] = 1;
        parent_node[other] = node;
        parent_cell[other] = c;
        stack.push_back(other);
      }
    }

    // Walk the path backwards; edges alternate -, +, -, ... starting from
    // the edge leaving the entering cell's column.
    std::vector<int> path;
    for (int node = target; parent_node[node] >= 0; node = parent_node[node]) {
      path.push_back(parent_cell[node]);
    }
    // path is ordered target -> ei; the edge adjacent to the entering
    // cell's row ei is path.back(), which carries sign -. Signs alternate
    // from there, so cell path[k] has sign - when (path.size()-1-k) is even.
    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    for (int k = static_cast<int>(path.size()) - 1, step = 0; k >= 0; --k, ++step) {
      if (step % 2 != 0) continue;  // + cells
      const int c = path[k];
      if (basis[c].flow < theta ||
          (basis[c].flow == theta && leaving >= 0 &&
           basis[c].row * m + basis[c].col < basis[leaving].row * m + basis[leaving].col)) {
        theta = basis[c].flow;
        leaving = c;
      }
    }

    for (int k = static_cast<int>(path.size()) - 1, step = 0; k >= 0; --k, ++step) {
      basis[path[k]].flow += (step % 2 == 0) ? -theta : theta;
      if (basis[path[k]].flow < 0.0) basis[path[k]].flow = 0.0;
    }

    // Replace the leaving cell with the entering one in place.
    auto& cells_r = row_cells[basis[leaving].row];
    cells_r.erase(std::find(cells_r.begin(), cells_r.end(), leaving));
    auto& cells_c = col_cells[basis[leaving].col];
    cells_c.erase(std::find(cells_c.begin(), cells_c.end(), leaving));
    in_basis(basis[leaving].row, basis[leaving].col) = 0;
    basis[leaving] = BasisCell{ei, ej, theta};
    row_cells[ei].push_back(leaving);
    col_cells[ej].push_back(leaving);
    in_basis(ei, ej) = 1;

    if (theta <= 0.0) {
      if (++degenerate_streak >= kDegenerateStreakForBland) bland = true;
    } else {
      degenerate_streak = 0;
    }
  }

  Matrix plan = Matrix::Zero(n, m);
  for (const auto& cell : basis) {
    plan(cell.row, cell.col) += cell.flow;
  }
  return plan;
}

}  // namespace otra::detail
