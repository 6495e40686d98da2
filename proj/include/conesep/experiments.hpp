#pragma once

#include "conesep/report.hpp"
#include "conesep/rsv_cond.hpp"

#include <string>
#include <vector>

namespace conesep {

/// Validated experiment configuration. Unknown JSON keys are rejected and the
/// schema is versioned; see from_json.
struct ExperimentConfig {
  int schema_version = 1;
  std::string experiment;
  Eigen::Index m = 20;
  Eigen::Index d = 40;
  int s = 3;
  double eps = 0.1;
  double delta = 0.0;
  int trials = 50;
  std::uint64_t seed = 1;
  int threads = 1;
  // tolerances
  double solver_tol = 1e-9;
  double bound_slack = 1e-4;
  double sigma_floor = 1e-8;
  int rsv_starts = 32;
  double grid_res = 0.005;
  // phase sweep
  std::vector<Eigen::Index> m_values;
  long samples = 100000;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Per trial: Gaussian map, sparse signal, bounded noise; asserts
/// ||x* - x0|| <= 2 eps / sigma_hat + slack whenever sigma_hat converged.
ExperimentReport run_robustness_experiment(const ExperimentConfig& cfg);

/// Per trial: approximately sparse signal at l1 distance delta from the
/// signed-support cone; asserts the norm-form bound kappa1 eps + kappa2 delta
/// with constants from the measured separation angle and gamma = sqrt(d).
ExperimentReport run_stability_experiment(const ExperimentConfig& cfg);

/// On instances passing the exact-recovery test, asserts a positive measured
/// separation angle and noisy-recovery error within the implied kappa bound.
ExperimentReport run_exact_implies_stable(const ExperimentConfig& cfg);

/// Recovery-probability curve over m with Gaussian-width and statistical-
/// dimension reference values; CSV columns (m, success_rate, w_sq, stat_dim).
ExperimentReport run_phase_sweep(const ExperimentConfig& cfg);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Single-file SVG line/scatter chart of a phase-sweep report.
std::string render_phase_sweep_svg(const ExperimentReport& report);

/// Draw an s-sparse signal with magnitudes bounded away from zero.
Vector sample_sparse_signal(RngStream& rng, Eigen::Index d, int s);

} // namespace conesep
