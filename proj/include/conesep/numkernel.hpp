#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>

namespace conesep {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown on malformed inputs (bad dimensions, non-finite entries, ...).
class input_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Dense linear map with cached singular data.
///
/// Factoring computes a full SVD once; everything else (extreme nonzero
/// singular values, numerical rank, an orthonormal kernel basis, the
/// pseudoinverse action) is derived from it. Immutable after construction.
class LinearMap {
public:
  LinearMap(Matrix entries, double tol = 1e-10);

  Eigen::Index rows() const { return entries_.rows(); }
  Eigen::Index cols() const { return entries_.cols(); }
  const Matrix& matrix() const { return entries_; }

  double sigma_max() const { return sigma_max_; }
  /// Smallest non-vanishing singular value; requires rank >= 1.
  double sigma_min_nonzero() const;
  Eigen::Index rank() const { return rank_; }

  /// Orthonormal basis of ker A, d x (d - rank). Empty when full column rank.
  const Matrix& kernel_basis() const { return kernel_basis_; }

  Vector apply(const Vector& x) const;
  Vector apply_adjoint(const Vector& y) const;

  /// Orthogonal projection onto ker A.
  Vector project_kernel(const Vector& x) const;
  /// Orthogonal projection onto (ker A)^perp = range A^T.
  Vector project_rowspace(const Vector& x) const;
  /// Pseudoinverse action A^+ y.
  Vector pinv_apply(const Vector& y) const;
  /// Orthogonal projection onto range A.
  Vector project_range(const Vector& y) const;

  /// Full right singular basis (d x d) and singular values padded with zeros,
  /// as needed by solvers that invert (I + A^T A).
  const Matrix& right_singular_vectors() const { return V_full_; }
  const Vector& singular_values_padded() const { return svals_full_; }
  const Matrix& left_singular_vectors() const { return U_; }

private:
  Matrix entries_;
  Matrix U_;        // m x m
  Matrix V_full_;   // d x d
  Vector svals_;    // min(m,d), descending
  Vector svals_full_; // length d, zero padded
  Matrix kernel_basis_;
  double sigma_max_ = 0.0;
  double sigma_min_nonzero_ = 0.0;
  Eigen::Index rank_ = 0;
};

/// Factor a dense row-major buffer; entry validation included.
LinearMap factor(const Matrix& entries, double tol = 1e-10);

/// Counter-based random stream. Identical (seed, stream_id) pairs reproduce
/// identical draws; distinct stream_ids decorrelate, so per-trial substreams
/// can be derived without sharing state.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Independent substream for trial/worker i, derived from identity only.
  RngStream substream(std::uint64_t i) const;

  std::uint64_t next_u64();
  /// Uniform on (0, 1), never exactly 0 or 1.
  double next_uniform();
  /// Standard normal (Box-Muller, deterministic).
  double next_normal();

private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Vector gaussian_vector(RngStream& rng, Eigen::Index d);
Matrix gaussian_matrix_entries(RngStream& rng, Eigen::Index m, Eigen::Index d);
LinearMap gaussian_matrix(RngStream& rng, Eigen::Index m, Eigen::Index d);

/// Expected length of a standard Gaussian vector in R^m:
/// l_m = sqrt(2) * Gamma((m+1)/2) / Gamma(m/2), evaluated in the log domain.
double expected_gauss_length(std::int64_t m);

} // namespace conesep
