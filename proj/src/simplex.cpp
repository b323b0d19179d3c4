#include "csa/simplex.hpp"

#include <cmath>
#include <limits>

#include "csa/errors.hpp"

namespace csa {

namespace {

constexpr double kPivotEps = 1e-9;

// Tableau rows: m constraint rows, one objective row (minimization form).
// Columns: n structural + m slack + (phase 1 only) artificials + rhs.
struct Tableau {
  int m, cols;
  std::vector<std::vector<double>> t;  // (m+1) x (cols+1); last row = objective
  std::vector<int> basis;              // basic column per row

  double& at(int r, int col) { return t[r][col]; }

  void pivot(int row, int col) {
    double piv = t[row][col];
    for (int c = 0; c <= cols; ++c) t[row][c] /= piv;
    for (int r = 0; r <= m; ++r) {
      if (r == row) continue;
      double f = t[r][col];
      if (f == 0.0) continue;
      for (int c = 0; c <= cols; ++c) t[r][c] -= f * t[row][c];
    }
    basis[row] = col;
  }

  // Minimizes the objective row. Returns false when unbounded.
  bool iterate(int usable_cols) {
    for (;;) {
      int enter = -1;
      for (int c = 0; c < usable_cols; ++c) {
        if (t[m][c] < -kPivotEps) {
          enter = c;  // Bland: first improving column
          break;
        }
      }
      if (enter < 0) return true;

      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m; ++r) {
        if (t[r][enter] > kPivotEps) {
          double ratio = t[r][cols] / t[r][enter];
          if (ratio < best_ratio - kPivotEps) {
            best_ratio = ratio;
            leave = r;
          } else if (leave >= 0 && ratio < best_ratio + kPivotEps && basis[r] < basis[leave]) {
            leave = r;  // Bland tie-break on the basic variable index
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

LpResult simplex_maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                          const std::vector<double>& c) {
  const int m = static_cast<int>(A.size());
  const int n = static_cast<int>(c.size());

  // Count artificials: one per row with negative rhs.
  int n_art = 0;
  for (double bi : b)
    if (bi < 0) ++n_art;

  Tableau tab;
  tab.m = m;
  tab.cols = n + m + n_art;
  tab.t.assign(m + 1, std::vector<double>(tab.cols + 1, 0.0));
  tab.basis.assign(m, -1);

  int art = n + m;
  for (int r = 0; r < m; ++r) {
    double sign = b[r] < 0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) tab.at(r, j) = sign * A[r][j];
    tab.at(r, n + r) = sign;  // slack
    tab.at(r, tab.cols) = sign * b[r];
    if (b[r] < 0) {
      tab.at(r, art) = 1.0;
      tab.basis[r] = art++;
    } else {
      tab.basis[r] = n + r;
    }
  }

  LpResult res;
  if (n_art > 0) {
    // Phase 1: minimize the sum of artificials.
    for (int a = n + m; a < tab.cols; ++a) tab.at(m, a) = 1.0;
    for (int r = 0; r < m; ++r)
      if (tab.basis[r] >= n + m)
        for (int col = 0; col <= tab.cols; ++col) tab.at(m, col) -= tab.at(r, col);
    if (!tab.iterate(tab.cols)) return res;  // cannot happen: phase 1 bounded below by 0
    if (tab.at(m, tab.cols) < -1e-7) return res;  // infeasible (objective = -sum > small)

    // Drive any basic artificial out of the basis (degenerate rows).
    for (int r = 0; r < m; ++r) {
      if (tab.basis[r] < n + m) continue;
      int col = -1;
      for (int jc = 0; jc < n + m; ++jc)
        if (std::abs(tab.at(r, jc)) > kPivotEps) {
          col = jc;
          break;
        }
      if (col >= 0) tab.pivot(r, col);
      // else: the row is all zeros and stays inert.
    }
  }

  // Phase 2: minimize -c.x over structural + slack columns.
  for (int col = 0; col <= tab.cols; ++col) tab.at(m, col) = 0.0;
  for (int j = 0; j < n; ++j) tab.at(m, j) = -c[j];
  for (int r = 0; r < m; ++r) {
    int bcol = tab.basis[r];
    double f = tab.at(m, bcol);
    if (f != 0.0)
      for (int col = 0; col <= tab.cols; ++col) tab.at(m, col) -= f * tab.at(r, col);
  }
  res.feasible = true;
  if (!tab.iterate(n + m)) {
    res.bounded = false;
    return res;
  }

  res.x.assign(n, 0.0);
  for (int r = 0; r < m; ++r)
    if (tab.basis[r] < n) res.x[tab.basis[r]] = tab.at(r, tab.cols);
  res.value = 0.0;
  for (int j = 0; j < n; ++j) res.value += c[j] * res.x[j];
  return res;
}

}  // namespace csa
