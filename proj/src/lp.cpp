#include "conesep/lp.hpp"

#include <cmath>

namespace conesep {

namespace {

constexpr double kPivotTol = 1e-11;

/// Simplex over the tableau rows [B | rhs] with reduced-cost row last.
/// Bland's rule; returns false when unbounded.
bool run_simplex(Matrix& t, std::vector<int>& basis, int ncols) {
  const int nrows = static_cast<int>(t.rows()) - 1;
  for (int iter = 0; iter < 20000; ++iter) {
    int enter = -1;
    for (int j = 0; j < ncols; ++j) {
      if (t(nrows, j) > kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return true; // optimal
    int leave = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < nrows; ++i) {
      if (t(i, enter) > kPivotTol) {
        const double ratio = t(i, ncols) / t(i, enter);
        if (leave < 0 || ratio < best_ratio - kPivotTol ||
            (ratio < best_ratio + kPivotTol && basis[static_cast<std::size_t>(i)] <
                                                   basis[static_cast<std::size_t>(leave)])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave < 0) return false; // unbounded
    const double piv = t(leave, enter);
    t.row(leave) /= piv;
    for (int i = 0; i <= nrows; ++i) {
      if (i == leave) continue;
      const double f = t(i, enter);
      if (f != 0.0) t.row(i) -= f * t.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }
  return true; // iteration cap; treat as optimal at current point
}

} // namespace

LpResult solve_lp_max(const Vector& c, const Matrix& G, const Vector& h) {
  const int nx = static_cast<int>(c.size());
  const int m = static_cast<int>(G.rows());
  if (G.cols() != nx || h.size() != m) throw input_error("solve_lp_max: dimension mismatch");

  // standard form: x = xp - xn, slacks s, artificials a; rows normalized to rhs >= 0
  const int nvars = 2 * nx + m;       // xp, xn, s
  const int total = nvars + m;        // + artificials
  Matrix t = Matrix::Zero(m + 1, total + 1);
  std::vector<int> basis(static_cast<std::size_t>(m));

  for (int i = 0; i < m; ++i) {
    const double sgn = h(i) >= 0 ? 1.0 : -1.0;
    for (int j = 0; j < nx; ++j) {
      t(i, j) = sgn * G(i, j);
      t(i, nx + j) = -sgn * G(i, j);
    }
    t(i, 2 * nx + i) = sgn; // slack
    t(i, nvars + i) = 1.0;  // artificial
    t(i, total) = sgn * h(i);
    basis[static_cast<std::size_t>(i)] = nvars + i;
  }

  // phase 1: maximize -sum(artificials)
  for (int j = 0; j <= total; ++j) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += t(i, j);
    t(m, j) = acc; // reduced costs of -sum a_i after pricing out the basis
  }
  t(m, total) = [&] {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += t(i, total);
    return acc;
  }();
  for (int i = 0; i < m; ++i) t(m, nvars + i) = 0.0;
  if (!run_simplex(t, basis, total)) return {LpStatus::infeasible, 0.0, {}};
  if (t(m, total) > 1e-7) return {LpStatus::infeasible, 0.0, {}};

  // drive any artificial still in the basis out (degenerate rows)
  for (int i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] >= nvars) {
      int piv = -1;
      for (int j = 0; j < nvars; ++j) {
        if (std::abs(t(i, j)) > kPivotTol) {
          piv = j;
          break;
        }
      }
      if (piv < 0) continue; // redundant row
      const double p = t(i, piv);
      t.row(i) /= p;
      for (int k = 0; k <= m; ++k) {
        if (k == i) continue;
        const double f = t(k, piv);
        if (f != 0.0) t.row(k) -= f * t.row(i);
      }
      basis[static_cast<std::size_t>(i)] = piv;
    }
  }

  // phase 2 objective: max c^T (xp - xn); price out the current basis
  Matrix t2 = Matrix::Zero(m + 1, nvars + 1);
  t2.topLeftCorner(m, nvars) = t.topLeftCorner(m, nvars);
  t2.col(nvars).head(m) = t.col(total).head(m);
  for (int j = 0; j < nx; ++j) {
    t2(m, j) = c(j);
    t2(m, nx + j) = -c(j);
  }
  for (int i = 0; i < m; ++i) {
    const int bj = basis[static_cast<std::size_t>(i)];
    if (bj >= nvars) continue;
    const double f = t2(m, bj);
    if (f != 0.0) t2.row(m) -= f * t2.row(i);
  }
  if (!run_simplex(t2, basis, nvars)) return {LpStatus::unbounded, 0.0, {}};

  Vector sol = Vector::Zero(nx);
  for (int i = 0; i < m; ++i) {
    const int bj = basis[static_cast<std::size_t>(i)];
    if (bj < nx) sol(bj) += t2(i, nvars);
    else if (bj < 2 * nx) sol(bj - nx) -= t2(i, nvars);
  }
  LpResult res;
  res.status = LpStatus::optimal;
  res.x = sol;
  res.value = c.dot(sol);
  return res;
}

} // namespace conesep
