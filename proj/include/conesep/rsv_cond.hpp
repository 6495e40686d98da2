#pragma once

#include "conesep/cones.hpp"
#include "conesep/report.hpp"

#include <cstdint>

namespace conesep {

enum class RsvMethod { multi_start_descent, grid_oracle };
enum class AngleStatus { ok, no_kernel, intersecting };

struct RsvOptions {
  int starts = 32;
  int max_iter = 10000;
  double tol = 1e-10;
  RsvMethod method = RsvMethod::multi_start_descent;
  /// Angular resolution of the grid oracle (d <= 4). The oracle value
  /// brackets the true extremum within sigma_max * grid_res (projection-
  /// polished candidates included).
  double grid_res = 0.005;
  int threads = 0;
  std::uint64_t seed = 0x5eedULL;
  /// Slack used by check_sandwich; < 0 derives it from the method
  /// (2 * sigma_max * grid_res for the grid, 1e-6 scale otherwise).
  double slack = -1.0;
};

/// Estimate of sigma_{C -> R^m}(A) = min_{x in C, ||x||=1} ||Ax||.
struct RsvResult {
  double sigma = 0.0;
  Vector witness;   // unit member of C attaining sigma
  RsvMethod method = RsvMethod::multi_start_descent;
  int starts = 0;
  bool converged = false;
};

/// Maximal separation angle theta* = arccos(sup_{x in C cap S} ||P_ker x||).
struct AngleResult {
  double theta_star = 0.0; // radians in [0, pi/2]; pi/2 when the kernel is trivial
  Vector witness_cone;     // x in C cap S
  Vector witness_kernel;   // y in ker A cap S (empty when undefined)
  RsvMethod method = RsvMethod::multi_start_descent;
  AngleStatus status = AngleStatus::ok;
};

struct CondResult {
  double value = 0.0;
  bool overflow = false;
};

RsvResult restricted_sv(const LinearMap& A, const Cone& C, const RsvOptions& opts = {});
AngleResult separation_angle(const LinearMap& A, const Cone& C, const RsvOptions& opts = {});

/// Grassmannian condition number via sin(theta*) = 1 / C(A).
CondResult grassmann_cond(const LinearMap& A, const Cone& C, const RsvOptions& opts = {});
/// Renegar condition number sigma_max(A) / sigma_{C -> R^m}(A).
CondResult renegar_cond(const LinearMap& A, const Cone& C, const RsvOptions& opts = {});

/// Verifies sin(theta*) sigma_min <= sigma_C <= sin(theta*) sigma_max and the
/// condition-number sandwich C <= C_R <= (sigma_max/sigma_min) C.
ExperimentReport check_sandwich(const LinearMap& A, const Cone& C, const RsvOptions& opts = {});

/// Spherical Fibonacci lattice (d = 3 grid backend), exposed for tests.
std::vector<Vector> fibonacci_sphere(std::size_t n);

} // namespace conesep
