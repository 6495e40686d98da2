#pragma once

#include "conesep/numkernel.hpp"

#include <utility>

namespace conesep {

enum class SolveStatus { optimal, max_iter, infeasible };

struct Certificate {
  Vector dual;              // y in R^m
  double dual_feasibility = 0.0; // ||A^T y||_inf (<= 1 at optimality)
  double gap = 0.0;              // primal objective minus dual objective
};

struct SolveResult {
  Vector x_star;
  double objective = 0.0;
  double eq_residual = 0.0; // ||A x - b||_2
  SolveStatus status = SolveStatus::max_iter;
  int iterations = 0;
  Certificate certificate;
};

struct SolverOptions {
  double tol = 1e-9;      // ADMM primal/dual residual tolerance
  double feas_tol = 1e-8; // absolute feasibility tolerance
  double cert_tol = 1e-6; // certificate slack
  int max_iter = 200000;
};

/// min ||x||_1  s.t.  Ax = b   (operator splitting with exact affine projection)
SolveResult solve_p1(const LinearMap& A, const Vector& b, const SolverOptions& opts = {});

/// min ||x||_1  s.t.  ||Ax - b|| <= eps
SolveResult solve_p1_noisy(const LinearMap& A, const Vector& b, double eps,
                           const SolverOptions& opts = {});

/// min ||x||_2  s.t.  Ax = b   (pseudoinverse action)
SolveResult solve_p2(const LinearMap& A, const Vector& b);

/// min ||x||_2  s.t.  ||Ax - b|| <= eps   (ridge path, scalar root finding)
SolveResult solve_p2_noisy(const LinearMap& A, const Vector& b, double eps,
                           const SolverOptions& opts = {});

struct RecoveryResult {
  bool recovered = false;        // solver solution matches x0
  bool unique_certified = false; // strictly interior dual certificate found
  SolveResult solve;
  bool passed() const { return recovered && unique_certified; }
};

/// Noiseless recovery check: solve P1 on b = A x0 and certify uniqueness via
/// a strictly interior dual vector on the complement of supp(x0).
RecoveryResult exact_recovery_test(const LinearMap& A, const Vector& x0, double tol = 1e-6,
                                   const SolverOptions& opts = {});

/// Concatenate A with a copy of its i-th column; i must lie in
/// supp(x_star) \ supp(x0). The returned pair is (A~, x0~ = (x0, 0)).
std::pair<LinearMap, Vector> duplicate_column_instance(const LinearMap& A, const Vector& x_star,
                                                       const Vector& x0, Eigen::Index i);

/// Extend x (solution of the original instance) by a zero coordinate.
Vector extend_with_zero(const Vector& x);
/// Move the i-th entry of the extended solution onto the duplicate column.
Vector column_swap_solution(const Vector& x_star_extended, Eigen::Index i);

} // namespace conesep
