#pragma once

#include "conesep/numkernel.hpp"

namespace conesep {

enum class LpStatus { optimal, unbounded, infeasible };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  Vector x;
};

/// max c^T x subject to G x <= h over free x. Dense two-phase simplex with
/// Bland's rule; intended for the small exact subproblems of this library.
LpResult solve_lp_max(const Vector& c, const Matrix& G, const Vector& h);

} // namespace conesep
