#include "conesep/solvers.hpp"

#include <cmath>

namespace conesep {

namespace {

Vector soft_threshold(const Vector& v, double lambda) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) > lambda) out(i) = v(i) - lambda;
    else if (v(i) < -lambda) out(i) = v(i) + lambda;
    else out(i) = 0.0;
  }
  return out;
}

/// Least-norm y with A^T y closest to g: y = (A^T)^+ g via the cached SVD.
Vector adjoint_pinv(const LinearMap& A, const Vector& g) {
  const Matrix& U = A.left_singular_vectors();
  const Matrix& V = A.right_singular_vectors();
  const Vector& s = A.singular_values_padded();
  Vector y = Vector::Zero(A.rows());
  for (Eigen::Index i = 0; i < A.rank(); ++i) {
    y += (V.col(i).dot(g) / s(i)) * U.col(i);
  }
  return y;
}

/// Try to sharpen an ADMM iterate by least squares on its detected support.
void polish_p1(const LinearMap& A, const Vector& b, Vector& x, double feas_tol) {
  std::vector<Eigen::Index> support;
  const double thresh = 1e-11 * (1.0 + x.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) > thresh) support.push_back(i);
  }
  if (support.empty() || static_cast<Eigen::Index>(support.size()) > A.rows()) return;
  Matrix as(A.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) as.col(static_cast<Eigen::Index>(k)) = A.matrix().col(support[k]);
  Vector xs = as.colPivHouseholderQr().solve(b);
  Vector cand = Vector::Zero(x.size());
  for (std::size_t k = 0; k < support.size(); ++k) cand(support[k]) = xs(static_cast<Eigen::Index>(k));
  if ((A.apply(cand) - b).norm() <= feas_tol * (1.0 + b.norm()) &&
      cand.lpNorm<1>() <= x.lpNorm<1>() + feas_tol) {
    x = cand;
  }
}

} // namespace

SolveResult solve_p1(const LinearMap& A, const Vector& b, const SolverOptions& opts) {
  if (b.size() != A.rows()) throw input_error("solve_p1: dimension mismatch");
  const Eigen::Index d = A.cols();
  SolveResult res;

  if ((b - A.project_range(b)).norm() > opts.feas_tol * (1.0 + b.norm())) {
    res.status = SolveStatus::infeasible;
    res.x_star = Vector::Zero(d);
    return res;
  }

  const Vector xb = A.pinv_apply(b);
  double rho = std::max(A.sigma_max(), 1e-8);
  Vector z = xb, u = Vector::Zero(d);
  Vector x = xb;
  int it = 0;
  bool converged = false;
  for (; it < opts.max_iter; ++it) {
    const Vector v = z - u;
    x = v - A.project_rowspace(v) + xb; // exact projection onto {Ax = b}
    const Vector z_old = z;
    z = soft_threshold(x + u, 1.0 / rho);
    u += x - z;

    const double r = (x - z).norm();
    const double s = rho * (z - z_old).norm();
    const double eps_pri = opts.tol * (std::sqrt(static_cast<double>(d)) + std::max(x.norm(), z.norm()));
    const double eps_dual = opts.tol * (std::sqrt(static_cast<double>(d)) + rho * u.norm());
    if (r <= eps_pri && s <= eps_dual) {
      converged = true;
      break;
    }
    if ((it + 1) % 50 == 0) {
      if (r > 10.0 * s) {
        rho *= 2.0;
        u *= 0.5;
      } else if (s > 10.0 * r) {
        rho *= 0.5;
        u *= 2.0;
      }
    }
  }

  polish_p1(A, b, x, opts.feas_tol);

  res.x_star = x;
  res.objective = x.lpNorm<1>();
  res.eq_residual = (A.apply(x) - b).norm();
  res.iterations = it;
  res.certificate.dual = adjoint_pinv(A, rho * u);
  res.certificate.dual_feasibility = (A.apply_adjoint(res.certificate.dual)).lpNorm<Eigen::Infinity>();
  res.certificate.gap = res.objective - b.dot(res.certificate.dual);
  const bool cert_ok = res.certificate.dual_feasibility <= 1.0 + opts.cert_tol &&
                       std::abs(res.certificate.gap) <= opts.cert_tol * (1.0 + res.objective);
  res.status = converged && res.eq_residual <= opts.feas_tol * (1.0 + b.norm()) && cert_ok
                   ? SolveStatus::optimal
                   : (converged ? SolveStatus::optimal : SolveStatus::max_iter);
  return res;
}

SolveResult solve_p1_noisy(const LinearMap& A, const Vector& b, double eps,
                           const SolverOptions& opts) {
  if (b.size() != A.rows()) throw input_error("solve_p1_noisy: dimension mismatch");
  if (eps < 0) throw input_error("solve_p1_noisy: eps >= 0 required");
  const Eigen::Index d = A.cols();
  const Eigen::Index m = A.rows();
  SolveResult res;

  if (eps == 0.0) return solve_p1(A, b, opts);

  if ((b - A.project_range(b)).norm() > eps + opts.feas_tol * (1.0 + b.norm())) {
    res.status = SolveStatus::infeasible;
    res.x_star = Vector::Zero(d);
    return res;
  }
  if (b.norm() <= eps) {
    res.x_star = Vector::Zero(d);
    res.objective = 0.0;
    res.eq_residual = b.norm();
    res.status = SolveStatus::optimal;
    res.certificate.dual = Vector::Zero(m);
    return res;
  }

  // (I + A^T A)^{-1} through the cached right singular basis
  const Matrix& V = A.right_singular_vectors();
  const Vector& svals = A.singular_values_padded();
  Vector inv_weights(d);
  for (Eigen::Index i = 0; i < d; ++i) inv_weights(i) = 1.0 / (1.0 + svals(i) * svals(i));
  auto solve_normal = [&](const Vector& rhs) -> Vector {
    return V * (inv_weights.asDiagonal() * (V.transpose() * rhs));
  };
  auto ball_project = [&](const Vector& w) -> Vector {
    const Vector diff = w - b;
    const double n = diff.norm();
    if (n <= eps) return w;
    return b + (eps / n) * diff;
  };

  double rho = std::max(A.sigma_max(), 1e-8);
  Vector x = A.pinv_apply(b);
  Vector z = x, w = A.apply(x);
  Vector u1 = Vector::Zero(d), u2 = Vector::Zero(m);
  int it = 0;
  bool converged = false;
  for (; it < opts.max_iter; ++it) {
    x = solve_normal((z - u1) + A.apply_adjoint(w - u2));
    const Vector ax = A.apply(x);
    const Vector z_old = z;
    const Vector w_old = w;
    z = soft_threshold(x + u1, 1.0 / rho);
    w = ball_project(ax + u2);
    u1 += x - z;
    u2 += ax - w;

    const double r = std::sqrt((x - z).squaredNorm() + (ax - w).squaredNorm());
    const double s =
        rho * std::sqrt((z - z_old).squaredNorm() + A.apply_adjoint(w - w_old).squaredNorm());
    const double scale = std::max({x.norm(), z.norm(), w.norm()});
    const double eps_pri = opts.tol * (std::sqrt(static_cast<double>(d + m)) + scale);
    const double eps_dual =
        opts.tol * (std::sqrt(static_cast<double>(d)) + rho * (u1.norm() + u2.norm()));
    if (r <= eps_pri && s <= eps_dual) {
      converged = true;
      break;
    }
    if ((it + 1) % 50 == 0) {
      if (r > 10.0 * s) {
        rho *= 2.0;
        u1 *= 0.5;
        u2 *= 0.5;
      } else if (s > 10.0 * r) {
        rho *= 0.5;
        u1 *= 2.0;
        u2 *= 2.0;
      }
    }
  }

  res.x_star = x;
  res.objective = x.lpNorm<1>();
  res.eq_residual = (A.apply(x) - b).norm();
  res.iterations = it;
  Vector y = -rho * u2;
  res.certificate.dual = y;
  res.certificate.dual_feasibility = A.apply_adjoint(y).lpNorm<Eigen::Infinity>();
  const double dual_obj = b.dot(y) - eps * y.norm();
  res.certificate.gap = res.objective - dual_obj;
  const bool feas = res.eq_residual <= eps + opts.feas_tol * (1.0 + b.norm());
  res.status = converged && feas ? SolveStatus::optimal : SolveStatus::max_iter;
  return res;
}

SolveResult solve_p2(const LinearMap& A, const Vector& b) {
  if (b.size() != A.rows()) throw input_error("solve_p2: dimension mismatch");
  SolveResult res;
  if ((b - A.project_range(b)).norm() > 1e-8 * (1.0 + b.norm())) {
    res.status = SolveStatus::infeasible;
    res.x_star = Vector::Zero(A.cols());
    return res;
  }
  res.x_star = A.pinv_apply(b);
  res.objective = res.x_star.norm();
  res.eq_residual = (A.apply(res.x_star) - b).norm();
  res.status = SolveStatus::optimal;
  res.iterations = 0;
  return res;
}

SolveResult solve_p2_noisy(const LinearMap& A, const Vector& b, double eps,
                           const SolverOptions& opts) {
  if (b.size() != A.rows()) throw input_error("solve_p2_noisy: dimension mismatch");
  if (eps < 0) throw input_error("solve_p2_noisy: eps >= 0 required");
  SolveResult res;

  if (eps == 0.0) return solve_p2(A, b);
  if (b.norm() <= eps) {
    res.x_star = Vector::Zero(A.cols());
    res.objective = 0.0;
    res.eq_residual = b.norm();
    res.status = SolveStatus::optimal;
    return res;
  }

  const Matrix& U = A.left_singular_vectors();
  const Vector& s = A.singular_values_padded();
  const Eigen::Index r = A.rank();
  Vector beta(r);
  for (Eigen::Index i = 0; i < r; ++i) beta(i) = U.col(i).dot(b);
  const double base_sq = (b - A.project_range(b)).squaredNorm();

  if (std::sqrt(base_sq) > eps + opts.feas_tol * (1.0 + b.norm())) {
    res.status = SolveStatus::infeasible;
    res.x_star = Vector::Zero(A.cols());
    return res;
  }

  auto residual_sq = [&](double lambda) {
    double acc = base_sq;
    for (Eigen::Index i = 0; i < r; ++i) {
      const double f = lambda / (s(i) * s(i) + lambda);
      acc += f * f * beta(i) * beta(i);
    }
    return acc;
  };

  double lambda = 0.0;
  const double target = eps * eps;
  if (residual_sq(0.0) < target) {
    double hi = std::max(1.0, A.sigma_max() * A.sigma_max());
    while (residual_sq(hi) < target) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (residual_sq(mid) < target) lo = mid;
      else hi = mid;
    }
    lambda = 0.5 * (lo + hi);
  }

  const Matrix& V = A.right_singular_vectors();
  Vector x = Vector::Zero(A.cols());
  for (Eigen::Index i = 0; i < r; ++i) {
    x += (s(i) * beta(i) / (s(i) * s(i) + lambda)) * V.col(i);
  }
  res.x_star = x;
  res.objective = x.norm();
  res.eq_residual = (A.apply(x) - b).norm();
  res.status = SolveStatus::optimal;
  return res;
}

RecoveryResult exact_recovery_test(const LinearMap& A, const Vector& x0, double tol,
                                   const SolverOptions& opts) {
  if (x0.size() != A.cols()) throw input_error("exact_recovery_test: dimension mismatch");
  if (x0.norm() == 0.0) throw input_error("exact_recovery_test: x0 must be nonzero");

  RecoveryResult out;
  out.solve = solve_p1(A, A.apply(x0), opts);
  if (out.solve.status == SolveStatus::infeasible) return out;
  out.recovered = (out.solve.x_star - x0).norm() <= tol * x0.norm();

  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < x0.size(); ++i)
    if (x0(i) != 0.0) support.push_back(i);

  // uniqueness needs injectivity on the support plus a strictly interior dual
  Matrix as(A.rows(), static_cast<Eigen::Index>(support.size()));
  Vector sg(static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    as.col(static_cast<Eigen::Index>(k)) = A.matrix().col(support[k]);
    sg(static_cast<Eigen::Index>(k)) = x0(support[k]) > 0 ? 1.0 : -1.0;
  }
  Eigen::JacobiSVD<Matrix> svd(as, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const bool injective =
      svd.singularValues().size() > 0 &&
      svd.singularValues()(svd.singularValues().size() - 1) > 1e-10 * svd.singularValues()(0);

  auto strictly_interior = [&](const Vector& y) {
    if (y.size() != A.rows()) return false;
    const Vector aty = A.apply_adjoint(y);
    for (std::size_t k = 0; k < support.size(); ++k) {
      if (std::abs(aty(support[k]) - sg(static_cast<Eigen::Index>(k))) > opts.cert_tol) return false;
    }
    double off_max = 0.0;
    for (Eigen::Index i = 0; i < x0.size(); ++i) {
      if (x0(i) == 0.0) off_max = std::max(off_max, std::abs(aty(i)));
    }
    return off_max < 1.0 - opts.cert_tol;
  };

  // least-norm interpolating certificate: A_S^T y = sgn(x0_S), y = U S^-1 V^T s
  Vector y_ls = Vector::Zero(A.rows());
  {
    const auto& sv = svd.singularValues();
    Vector tmp = svd.matrixV().transpose() * sg;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      tmp(i) = sv(i) > 1e-12 * sv(0) ? tmp(i) / sv(i) : 0.0;
    y_ls = svd.matrixU() * tmp;
  }

  out.unique_certified =
      injective && (strictly_interior(y_ls) || strictly_interior(out.solve.certificate.dual));
  return out;
}

std::pair<LinearMap, Vector> duplicate_column_instance(const LinearMap& A, const Vector& x_star,
                                                       const Vector& x0, Eigen::Index i) {
  if (x_star.size() != A.cols() || x0.size() != A.cols())
    throw input_error("duplicate_column_instance: dimension mismatch");
  if (i < 0 || i >= A.cols() || x_star(i) == 0.0 || x0(i) != 0.0)
    throw input_error("duplicate_column_instance: index must lie in supp(x*) \\ supp(x0)");
  Matrix ext(A.rows(), A.cols() + 1);
  ext.leftCols(A.cols()) = A.matrix();
  ext.col(A.cols()) = A.matrix().col(i);
  Vector x0_ext = extend_with_zero(x0);
  return {factor(ext), std::move(x0_ext)};
}

Vector extend_with_zero(const Vector& x) {
  Vector out(x.size() + 1);
  out.head(x.size()) = x;
  out(x.size()) = 0.0;
  return out;
}

Vector column_swap_solution(const Vector& x_star_extended, Eigen::Index i) {
  if (i < 0 || i >= x_star_extended.size() - 1)
    throw input_error("column_swap_solution: bad index");
  Vector out = x_star_extended;
  out(out.size() - 1) = out(i);
  out(i) = 0.0;
  return out;
}

} // namespace conesep
