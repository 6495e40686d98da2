#include "conesep/numkernel.hpp"

#include <cmath>

namespace conesep {

LinearMap::LinearMap(Matrix entries, double tol) : entries_(std::move(entries)) {
  const auto m = entries_.rows();
  const auto d = entries_.cols();
  if (m < 1 || d < 1) throw input_error("LinearMap: need m >= 1 and d >= 1");
  if (!entries_.allFinite()) throw input_error("LinearMap: non-finite entries");
  if (!(tol > 0)) throw input_error("LinearMap: tol must be positive");

  Eigen::JacobiSVD<Matrix> svd(entries_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  U_ = svd.matrixU();
  V_full_ = svd.matrixV();
  svals_ = svd.singularValues();

  sigma_max_ = svals_.size() > 0 ? svals_(0) : 0.0;
  const double cutoff = tol * sigma_max_;
  rank_ = 0;
  for (Eigen::Index i = 0; i < svals_.size(); ++i) {
    if (svals_(i) > cutoff) ++rank_;
  }
  sigma_min_nonzero_ = rank_ > 0 ? svals_(rank_ - 1) : 0.0;

  svals_full_ = Vector::Zero(d);
  for (Eigen::Index i = 0; i < rank_; ++i) svals_full_(i) = svals_(i);

  kernel_basis_ = V_full_.rightCols(d - rank_);
}

double LinearMap::sigma_min_nonzero() const {
  if (rank_ < 1) throw input_error("sigma_min_nonzero: zero map has no nonzero singular value");
  return sigma_min_nonzero_;
}

Vector LinearMap::apply(const Vector& x) const {
  if (x.size() != cols()) throw input_error("apply: dimension mismatch");
  return entries_ * x;
}

Vector LinearMap::apply_adjoint(const Vector& y) const {
  if (y.size() != rows()) throw input_error("apply_adjoint: dimension mismatch");
  return entries_.transpose() * y;
}

Vector LinearMap::project_kernel(const Vector& x) const {
  if (x.size() != cols()) throw input_error("project_kernel: dimension mismatch");
  if (kernel_basis_.cols() == 0) return Vector::Zero(cols());
  return kernel_basis_ * (kernel_basis_.transpose() * x);
}

Vector LinearMap::project_rowspace(const Vector& x) const {
  if (x.size() != cols()) throw input_error("project_rowspace: dimension mismatch");
  return x - project_kernel(x);
}

Vector LinearMap::pinv_apply(const Vector& y) const {
  if (y.size() != rows()) throw input_error("pinv_apply: dimension mismatch");
  Vector c = U_.leftCols(rank_).transpose() * y;
  for (Eigen::Index i = 0; i < rank_; ++i) c(i) /= svals_(i);
  return V_full_.leftCols(rank_) * c;
}

Vector LinearMap::project_range(const Vector& y) const {
  if (y.size() != rows()) throw input_error("project_range: dimension mismatch");
  if (rank_ == 0) return Vector::Zero(rows());
  return U_.leftCols(rank_) * (U_.leftCols(rank_).transpose() * y);
}

LinearMap factor(const Matrix& entries, double tol) { return LinearMap(entries, tol); }

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  state_ = mix64(seed + 0x9E3779B97F4A7C15ULL) ^ mix64(stream_id * 0xD2B74407B1CE6E93ULL + 1);
}

RngStream RngStream::substream(std::uint64_t i) const {
  return RngStream(seed_, mix64(stream_id_ * 0xA24BAED4963EE407ULL + i + 1));
}

std::uint64_t RngStream::next_u64() { return splitmix64(state_); }

double RngStream::next_uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Vector gaussian_vector(RngStream& rng, Eigen::Index d) {
  if (d < 1) throw input_error("gaussian_vector: d >= 1 required");
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = rng.next_normal();
  return v;
}

Matrix gaussian_matrix_entries(RngStream& rng, Eigen::Index m, Eigen::Index d) {
  if (m < 1 || d < 1) throw input_error("gaussian_matrix: m, d >= 1 required");
  Matrix a(m, d);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rng.next_normal();
  return a;
}

LinearMap gaussian_matrix(RngStream& rng, Eigen::Index m, Eigen::Index d) {
  return LinearMap(gaussian_matrix_entries(rng, m, d));
}

double expected_gauss_length(std::int64_t m) {
  if (m < 1) throw input_error("expected_gauss_length: m >= 1 required");
  const double half = 0.5 * static_cast<double>(m);
  return std::exp(0.5 * std::log(2.0) + std::lgamma(half + 0.5) - std::lgamma(half));
}

} // namespace conesep
