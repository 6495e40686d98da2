#pragma once

#include "conesep/cones.hpp"
#include "conesep/report.hpp"
#include "conesep/rsv_cond.hpp"

namespace conesep {

struct WidthEstimate {
  double mean = 0.0;
  double stderr_ = 0.0; // sample std / sqrt(samples)
  long samples = 0;
  std::string method;   // "exact-support" | "projection"
};

/// Monte Carlo Gaussian width of C cap S: mean of ||g|| * support(C, g).
/// Exact sphere support for Subspace and Circular variants; the projection
/// value ||P_C g|| otherwise (biased upward where the true supremum is
/// negative).
WidthEstimate gaussian_width_mc(const Cone& C, long n, RngStream rng, int threads = 0);

/// Monte Carlo statistical dimension: mean of ||P_C g||^2.
WidthEstimate statistical_dim_mc(const Cone& C, long n, RngStream rng, int threads = 0);

/// Verifies w(C) <= w(C^theta) <= cos(theta) w(C) + sin(theta) l_H and the
/// squared form with sqrt(5) sin(theta) l_H^2 slack, for circular cones
/// (closed-form expansion) with common random draws.
ExperimentReport width_expansion_check(const Cone& C, double theta, long n, RngStream rng,
                                       int threads = 0);

/// Empirical escape tail: frequency of { sigma_hat <= l_m - w(T) - t } over
/// Gaussian maps against exp(-t^2/2) plus a binomial two-sigma margin. The
/// multi-start estimate upper-bounds the true infimum, so the measured
/// frequency is conservative (flagged in the report).
ExperimentReport escape_mesh_experiment(const Cone& C, Eigen::Index m, double t, int trials,
                                        RngStream rng, const RsvOptions& rsv_opts = [] {
                                          RsvOptions o;
                                          o.starts = 8;
                                          o.max_iter = 2000;
                                          o.tol = 1e-9;
                                          return o;
                                        }(),
                                        int threads = 0);

/// Reference statistical dimension of a circular cone: d sin^2(alpha)
/// (the order-one correction is not modeled).
double circ_stat_dim_formula(Eigen::Index d, double alpha);

} // namespace conesep
