#pragma once

#include "conesep/cones.hpp"
#include "conesep/report.hpp"

#include <optional>
#include <vector>

namespace conesep {

/// Restricted isometry constants delta_1..delta_K.
struct RipTable {
  std::vector<double> delta; // delta[k-1] = delta_k
  double at(int k) const {
    if (k < 1 || k > static_cast<int>(delta.size())) throw input_error("RipTable: order out of range");
    return delta[static_cast<std::size_t>(k - 1)];
  }
  int max_order() const { return static_cast<int>(delta.size()); }
};

struct RnspParams {
  double gamma = 0.0;
  double tau = 0.0;
};

struct RnspOptions {
  int primal_starts = 24;
  int primal_iters = 400;
  int dual_iters = 4000;
  double slack = 1e-8;
  std::uint64_t seed = 0xA11CEULL;
};

struct RnspResult {
  bool holds = false;
  /// Largest sphere-normalized optimum over the sign patterns; RNSP holds iff
  /// this stays below the slack. Negative values measure the margin.
  double worst_slack = 0.0;
  /// Dual upper bound on the worst ball-constrained optimum (certificate).
  double certified_upper = 0.0;
};

/// Exact RIP constants by support enumeration; C(d, k) <= 10^6 per order.
RipTable rip_constants(const LinearMap& A, int K);

/// Samples disjoint-support s-sparse pairs and checks
/// |<Au, Av>| <= delta_2s ||u|| ||v||.
ExperimentReport check_rip_cross(const LinearMap& A, int s, int trials, RngStream rng);

/// Strict null space property w.r.t. S0, decided exactly by one LP per sign
/// pattern on S0 (2^{|S0|} <= 2^16).
bool nsp_check(const LinearMap& A, const std::vector<Eigen::Index>& S0);

/// Robust NSP check: for each sign pattern, maximizes
/// <sigma, x_T> - gamma ||x_Tc||_1 - tau ||Ax|| over the unit sphere
/// (multi-start smoothed ascent) and bounds it from above through the dual
/// norm-minimization form.
RnspResult rnsp_check(const LinearMap& A, const std::vector<Eigen::Index>& T, double gamma,
                      double tau, const RnspOptions& opts = {});

/// Angle guaranteed by RIP constants:
/// c = (1/(1-delta_s)) (delta_s + sqrt(5) sqrt(d/s+1) delta_2s / (1+delta_s));
/// returns arccos(c) when c < 1, nothing otherwise.
std::optional<double> rip_to_asc_angle(double delta_s, double delta_2s, Eigen::Index d, int s);

/// Partition of S0^c into blocks of size <= s, magnitudes nonincreasing
/// across consecutive blocks (ties broken by ascending index).
std::vector<std::vector<Eigen::Index>> block_partition(const Vector& u,
                                                       const std::vector<Eigen::Index>& S0, int s);

/// Samples descent-cone directions at x0 and checks
/// sum_i ||u_{S_i}||_2 < sqrt(5) ||u||_2 over the monotone block partition.
ExperimentReport check_sqrt5_bound(Eigen::Index d, const Vector& x0, int trials, RngStream rng);

/// RNSP parameters implied by a uniform separation angle:
/// gamma = cos^2(theta/2), tau = sqrt(|T|) / (sigma_min sin(theta/2)).
RnspParams asc_to_rnsp(double theta, double sigma_min, const std::vector<Eigen::Index>& T);

/// Certified lower bound (1-gamma)/(2 tau) for the restricted singular value
/// of every l1 descent cone supported on T.
double rnsp_to_rsv_bound(double gamma, double tau);

struct MuOptions {
  long samples = 100000;
  int refinements = 50;
  int refine_iters = 200;
  std::uint64_t seed = 0xFACEULL;
};

/// Face constant mu(x0) = sup_{x in P \ {x0}} ||Pi_U (x - x0)|| / ||x - x0||,
/// estimated by vertex evaluation, dense convex-combination sampling and
/// simplex-projected ascent refinement. Requires (x0 + U) cap P = {x0},
/// verified by LP feasibility up front.
double polytope_mu(const Polytope& P, const Vector& x0, const Matrix& U_basis,
                   const MuOptions& opts = {});

} // namespace conesep
