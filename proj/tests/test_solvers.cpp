#include <doctest.h>

#include "conesep/rsv_cond.hpp"
#include "conesep/solvers.hpp"

#include <cmath>

using namespace conesep;

namespace {

Vector sparse_vector(RngStream& rng, Eigen::Index d, int s) {
  Vector x = Vector::Zero(d);
  int placed = 0;
  while (placed < s) {
    const auto i = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(d));
    if (x(i) != 0.0) continue;
    double v = rng.next_normal();
    if (std::abs(v) < 0.3) v = v < 0 ? v - 0.3 : v + 0.3;
    x(i) = v;
    ++placed;
  }
  return x;
}

} // namespace

TEST_CASE("solve_p1: identity measurements return b") {
  LinearMap a = factor(Matrix::Identity(4, 4));
  Vector b(4);
  b << 1.0, -2.0, 0.0, 0.5;
  SolveResult r = solve_p1(a, b);
  CHECK(r.status == SolveStatus::optimal);
  CHECK((r.x_star - b).norm() <= 1e-8);
}

TEST_CASE("solve_p1: zero data gives zero") {
  RngStream rng(201, 0);
  LinearMap a = gaussian_matrix(rng, 3, 6);
  SolveResult r = solve_p1(a, Vector::Zero(3));
  CHECK(r.status == SolveStatus::optimal);
  CHECK(r.x_star.norm() <= 1e-10);
}

TEST_CASE("solve_p1: infeasible right-hand side flagged") {
  Matrix m(2, 2);
  m << 1, 0, 1, 0; // range = span{(1,1)}
  LinearMap a = factor(m);
  Vector b(2);
  b << 1.0, -1.0;
  CHECK(solve_p1(a, b).status == SolveStatus::infeasible);
}

TEST_CASE("solve_p1: dual certificate accompanies optima") {
  RngStream rng(202, 0);
  LinearMap a = gaussian_matrix(rng, 4, 8);
  Vector x0 = sparse_vector(rng, 8, 2);
  SolveResult r = solve_p1(a, a.apply(x0));
  CHECK(r.status == SolveStatus::optimal);
  CHECK(r.certificate.dual_feasibility <= 1.0 + 1e-6);
  CHECK(std::abs(r.certificate.gap) <= 1e-6 * (1.0 + r.objective));
  CHECK(r.objective <= x0.lpNorm<1>() + 1e-8); // x0 is feasible
}

TEST_CASE("solve_p1: recovers 1-sparse signals on Gaussian instances") {
  RngStream rng(203, 0);
  int recovered = 0;
  for (int trial = 0; trial < 20; ++trial) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(trial));
    LinearMap a = gaussian_matrix(sub, 4, 6);
    Vector x0 = sparse_vector(sub, 6, 1);
    RecoveryResult rec = exact_recovery_test(a, x0);
    if (rec.passed()) {
      ++recovered;
      CHECK((rec.solve.x_star - x0).norm() <= 1e-6 * x0.norm());
    }
  }
  CHECK(recovered >= 15); // 4 Gaussian measurements recover 1-sparse signals most of the time
}

TEST_CASE("solve_p1_noisy: trivial regimes") {
  RngStream rng(204, 0);
  LinearMap a = gaussian_matrix(rng, 3, 5);
  Vector b = gaussian_vector(rng, 3);

  SolveResult r = solve_p1_noisy(a, b, b.norm() + 0.1);
  CHECK(r.status == SolveStatus::optimal);
  CHECK(r.x_star.norm() == 0.0);

  SolveResult r0 = solve_p1_noisy(a, b, 0.0);
  SolveResult rp1 = solve_p1(a, b);
  CHECK((r0.x_star - rp1.x_star).norm() <= 1e-6 * (1.0 + rp1.x_star.norm()));
}

TEST_CASE("solve_p1_noisy: objective monotone in eps") {
  RngStream rng(205, 0);
  LinearMap a = gaussian_matrix(rng, 4, 8);
  Vector x0 = sparse_vector(rng, 8, 2);
  Vector b = a.apply(x0);
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.01, 0.05, 0.2, 0.6}) {
    SolveResult r = solve_p1_noisy(a, b, eps);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.objective <= prev + 1e-7);
    CHECK(r.eq_residual <= eps + 1e-7);
    prev = r.objective;
  }
}

TEST_CASE("solve_p1_noisy: robustness bound 2 eps / sigma on a midsize instance") {
  RngStream rng(206, 0);
  LinearMap a = gaussian_matrix(rng, 20, 40);
  Vector x0 = sparse_vector(rng, 40, 3);
  Cone cone = Cone::l1_descent(x0);
  RsvOptions ropts;
  ropts.starts = 24;
  RsvResult rsv = restricted_sv(a, cone, ropts);
  REQUIRE(rsv.sigma > 1e-6);

  const double eps = 0.1;
  for (int t = 0; t < 10; ++t) {
    RngStream sub = rng.substream(900 + static_cast<std::uint64_t>(t));
    Vector noise = gaussian_vector(sub, 20);
    noise *= eps * sub.next_uniform() / noise.norm();
    SolveResult r = solve_p1_noisy(a, a.apply(x0) + noise, eps);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK((r.x_star - x0).norm() <= 2.0 * eps / rsv.sigma + 1e-4);
  }
}

TEST_CASE("solve_p2: pseudoinverse solution") {
  RngStream rng(207, 0);
  LinearMap a = gaussian_matrix(rng, 3, 7);
  Vector b = gaussian_vector(rng, 3);
  SolveResult r = solve_p2(a, b);
  CHECK(r.status == SolveStatus::optimal);
  CHECK((r.x_star - a.pinv_apply(b)).norm() <= 1e-12);
  CHECK(a.project_kernel(r.x_star).norm() <= 1e-10);
}

TEST_CASE("solve_p2_noisy: trivial and boundary regimes") {
  RngStream rng(208, 0);
  LinearMap a = gaussian_matrix(rng, 3, 6);
  Vector b = gaussian_vector(rng, 3);

  CHECK(solve_p2_noisy(a, b, b.norm() + 1.0).x_star.norm() == 0.0);

  SolveResult r0 = solve_p2_noisy(a, b, 0.0);
  CHECK((r0.x_star - a.pinv_apply(b)).norm() <= 1e-10);

  const double eps = 0.3 * b.norm();
  SolveResult r = solve_p2_noisy(a, b, eps);
  CHECK(r.eq_residual == doctest::Approx(eps).epsilon(1e-6));
  CHECK(r.objective < r0.objective);
  CHECK(a.project_kernel(r.x_star).norm() <= 1e-8);
}

TEST_CASE("solve_p2_noisy: robustness without the ASC") {
  // x0 orthogonal to the kernel; solutions live in ker A^perp, giving
  // ||x* - x0|| <= 2 eps / sigma_min even though every expansion meets the kernel
  RngStream rng(209, 0);
  LinearMap a = gaussian_matrix(rng, 4, 6);
  Vector x0 = a.project_rowspace(gaussian_vector(rng, 6));
  const double eps = 0.05;
  for (int t = 0; t < 20; ++t) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(t));
    Vector noise = gaussian_vector(sub, 4);
    noise *= eps / noise.norm();
    SolveResult r = solve_p2_noisy(a, a.apply(x0) + noise, eps);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK((r.x_star - x0).norm() <= 2.0 * eps / a.sigma_min_nonzero() + 1e-8);
  }
}

TEST_CASE("exact_recovery_test: identity always recovers") {
  LinearMap a = factor(Matrix::Identity(5, 5));
  Vector x0 = Vector::Zero(5);
  x0(2) = -3.0;
  RecoveryResult r = exact_recovery_test(a, x0);
  CHECK(r.recovered);
  CHECK(r.unique_certified);
}

TEST_CASE("exact_recovery_test: kernel direction on the support breaks recovery") {
  Matrix m(1, 2);
  m << 0.0, 1.0; // kernel = e1
  LinearMap a = factor(m);
  Vector x0(2);
  x0 << 1.0, 0.0;
  RecoveryResult r = exact_recovery_test(a, x0);
  CHECK(!r.passed());
}

TEST_CASE("exact_recovery_test agrees with descent-cone kernel separation (d=3)") {
  RngStream rng(210, 0);
  RsvOptions gopts;
  gopts.method = RsvMethod::grid_oracle;
  gopts.grid_res = 0.01;
  int checked = 0;
  for (int trial = 0; trial < 14; ++trial) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(trial));
    LinearMap a = gaussian_matrix(sub, 2, 3);
    Vector x0 = sparse_vector(sub, 3, 1);
    RecoveryResult rec = exact_recovery_test(a, x0);
    AngleResult ang = separation_angle(a, Cone::l1_descent(x0), gopts);
    // positive separation <=> exact recovery (borderline angles skipped)
    if (ang.theta_star > 5e-3) {
      CHECK(rec.recovered);
      ++checked;
    } else if (ang.theta_star == 0.0) {
      CHECK(!rec.passed());
      ++checked;
    }
  }
  CHECK(checked >= 10);
}

TEST_CASE("duplicate_column_instance: equal objectives and preserved recovery") {
  RngStream rng(211, 0);
  LinearMap a = gaussian_matrix(rng, 6, 12);
  Vector x0 = sparse_vector(rng, 12, 2);
  REQUIRE(exact_recovery_test(a, x0).passed());

  const double eps = 0.15;
  Vector noise = gaussian_vector(rng, 6);
  noise *= eps / noise.norm();
  Vector b = a.apply(x0) + noise;
  SolveResult sol = solve_p1_noisy(a, b, eps);
  REQUIRE(sol.status == SolveStatus::optimal);

  Eigen::Index dup = -1;
  for (Eigen::Index i = 0; i < 12; ++i) {
    if (x0(i) == 0.0 && std::abs(sol.x_star(i)) > 1e-7) dup = i;
  }
  REQUIRE(dup >= 0);

  auto [ext, x0_ext] = duplicate_column_instance(a, sol.x_star, x0, dup);
  CHECK(ext.cols() == 13);

  const Vector xs_ext = extend_with_zero(sol.x_star);
  const Vector xs_swap = column_swap_solution(xs_ext, dup);
  std::vector<double> objectives;
  for (double th : {0.0, 0.5, 1.0}) {
    const Vector combo = th * xs_ext + (1.0 - th) * xs_swap;
    objectives.push_back(combo.lpNorm<1>());
    CHECK((ext.apply(combo) - b).norm() <= eps + 1e-7);
  }
  CHECK(std::abs(objectives[0] - objectives[1]) <= 1e-10);
  CHECK(std::abs(objectives[1] - objectives[2]) <= 1e-10);

  // the extended sparse signal is still recovered from exact measurements
  RecoveryResult rec = exact_recovery_test(ext, x0_ext);
  CHECK(rec.recovered);

  CHECK_THROWS_AS(duplicate_column_instance(a, sol.x_star, x0, /*i=*/[&] {
                    for (Eigen::Index i = 0; i < 12; ++i)
                      if (x0(i) != 0.0) return i;
                    return Eigen::Index{0};
                  }()),
                  input_error);
}

TEST_CASE("positive restricted singular value on recovery instances") {
  RngStream rng(212, 0);
  int positives = 0;
  for (int trial = 0; trial < 10; ++trial) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(trial));
    LinearMap a = gaussian_matrix(sub, 5, 8);
    Vector x0 = sparse_vector(sub, 8, 1);
    if (!exact_recovery_test(a, x0).passed()) continue;
    RsvResult rsv = restricted_sv(a, Cone::l1_descent(x0));
    CHECK(rsv.sigma > 10.0 * 1e-10);
    ++positives;
  }
  CHECK(positives >= 5);
}
