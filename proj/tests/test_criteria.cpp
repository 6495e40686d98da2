#include <doctest.h>

#include "conesep/criteria.hpp"
#include "conesep/lp.hpp"
#include "conesep/rsv_cond.hpp"
#include "conesep/solvers.hpp"

#include <cmath>

using namespace conesep;

namespace {

Vector sparse_signal(RngStream& rng, Eigen::Index d, const std::vector<Eigen::Index>& support,
                     std::uint64_t sign_mask) {
  Vector x = Vector::Zero(d);
  for (std::size_t k = 0; k < support.size(); ++k) {
    const double mag = 0.5 + rng.next_uniform();
    x(support[k]) = (sign_mask >> k) & 1 ? -mag : mag;
  }
  return x;
}

} // namespace

TEST_CASE("lp: known optimum, unboundedness, infeasibility") {
  // max x + y s.t. x <= 1, y <= 2, -x <= 0, -y <= 0
  Matrix g(4, 2);
  g << 1, 0, 0, 1, -1, 0, 0, -1;
  Vector h(4);
  h << 1, 2, 0, 0;
  Vector c(2);
  c << 1, 1;
  LpResult r = solve_lp_max(c, g, h);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.value == doctest::Approx(3.0).epsilon(1e-9));

  Matrix g2(1, 1);
  g2 << -1.0;
  Vector h2(1);
  h2 << 0.0;
  Vector c2(1);
  c2 << 1.0;
  CHECK(solve_lp_max(c2, g2, h2).status == LpStatus::unbounded);

  Matrix g3(2, 1);
  g3 << 1, -1;
  Vector h3(2);
  h3 << -1.0, -1.0; // x <= -1 and x >= 1
  CHECK(solve_lp_max(c2, g3, h3).status == LpStatus::infeasible);
}

TEST_CASE("rip_constants: isometries and diagonal case") {
  Matrix q(4, 3);
  q << 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0;
  RipTable t = rip_constants(factor(q), 3);
  for (int k = 1; k <= 3; ++k) CHECK(t.at(k) <= 1e-12);

  Matrix dg = Matrix::Zero(2, 2);
  dg(0, 0) = 1.0;
  dg(1, 1) = 2.0;
  RipTable td = rip_constants(factor(dg), 1);
  CHECK(td.at(1) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("rip_constants: enumeration matches a per-support closed form (8x12)") {
  RngStream rng(301, 0);
  Matrix a = gaussian_matrix_entries(rng, 8, 12) / std::sqrt(8.0);
  LinearMap A = factor(a);
  RipTable t = rip_constants(A, 3);

  // independent oracle for k = 2: 2x2 Gram eigenvalues in closed form
  double worst = 0.0;
  for (int i = 0; i < 12; ++i) {
    for (int j = i + 1; j < 12; ++j) {
      const double aii = a.col(i).squaredNorm();
      const double ajj = a.col(j).squaredNorm();
      const double aij = a.col(i).dot(a.col(j));
      const double mean = 0.5 * (aii + ajj);
      const double disc = std::sqrt(0.25 * (aii - ajj) * (aii - ajj) + aij * aij);
      worst = std::max({worst, (mean + disc) - 1.0, 1.0 - (mean - disc)});
    }
  }
  CHECK(t.at(2) == doctest::Approx(worst).epsilon(1e-10));
  CHECK(t.at(1) <= t.at(2));
  CHECK(t.at(2) <= t.at(3));
}

TEST_CASE("check_rip_cross: orthonormal and random matrices") {
  Matrix q = Matrix::Identity(6, 4);
  ExperimentReport rep = check_rip_cross(factor(q), 2, 200, RngStream(302, 0));
  CHECK(rep.pass);
  CHECK(rep.observed["max_ratio"].get<double>() <= 1e-9);

  RngStream rng(303, 0);
  Matrix a = gaussian_matrix_entries(rng, 8, 12) / std::sqrt(8.0);
  ExperimentReport rep2 = check_rip_cross(factor(a), 2, 1000, RngStream(304, 0));
  CHECK(rep2.pass);
  CHECK(rep2.observed["max_ratio"].get<double>() <= 1.0);
}

TEST_CASE("nsp_check: trivial kernel and violating kernel directions") {
  RngStream rng(305, 0);
  LinearMap tall = gaussian_matrix(rng, 6, 4);
  CHECK(nsp_check(tall, {0, 1}));

  // kernel contains e0 which lies in S0
  Matrix m(1, 2);
  m << 0.0, 1.0;
  CHECK(!nsp_check(factor(m), {0}));
}

TEST_CASE("nsp_check agrees with exhaustive sign-pattern recovery") {
  RngStream rng(306, 0);
  int agreements = 0;
  int nsp_true = 0;
  for (int trial = 0; trial < 15; ++trial) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(trial));
    LinearMap a = gaussian_matrix(sub, 6, 10);
    std::vector<Eigen::Index> S0 = {static_cast<Eigen::Index>(sub.next_u64() % 10), 0};
    if (S0[1] == S0[0]) S0[1] = (S0[0] + 1) % 10;
    const bool nsp = nsp_check(a, S0);
    bool all_recovered = true;
    for (std::uint64_t mask = 0; mask < 4; ++mask) {
      Vector x0 = sparse_signal(sub, 10, S0, mask);
      if (!exact_recovery_test(a, x0).recovered) all_recovered = false;
    }
    CHECK(nsp == all_recovered);
    agreements += (nsp == all_recovered);
    nsp_true += nsp;
  }
  CHECK(agreements == 15);
  CHECK(nsp_true >= 3); // both outcomes should occur at this geometry
  CHECK(nsp_true <= 13);
}

TEST_CASE("rnsp_check: injectivity gives the property, zero params fail it") {
  RngStream rng(307, 0);
  LinearMap tall = gaussian_matrix(rng, 5, 3);
  const double tau = std::sqrt(2.0) / tall.sigma_min_nonzero() * 1.0001;
  RnspResult ok = rnsp_check(tall, {0, 1}, 0.0, tau);
  CHECK(ok.holds);
  CHECK(ok.worst_slack <= 1e-8);

  LinearMap wide = gaussian_matrix(rng, 2, 5);
  RnspResult bad = rnsp_check(wide, {0, 1}, 0.0, 0.0);
  CHECK(!bad.holds);
  CHECK(bad.worst_slack >= 1.0); // flat sign vector already violates by sqrt(|T|)
}

TEST_CASE("rnsp_check: parameters derived from a measured angle pass") {
  RngStream rng(308, 0);
  for (int trial = 0; trial < 4; ++trial) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(trial));
    LinearMap a = gaussian_matrix(sub, 6, 10);
    std::vector<Eigen::Index> T = {1, 4};
    double theta = M_PI;
    for (std::uint64_t mask = 0; mask < 4; ++mask) {
      Vector x0 = sparse_signal(sub, 10, T, mask);
      AngleResult ang = separation_angle(a, Cone::l1_descent(x0));
      theta = std::min(theta, ang.theta_star);
    }
    if (theta <= 1e-3) continue; // uniform ASC absent; nothing to derive
    RnspParams p = asc_to_rnsp(theta, a.sigma_min_nonzero(), T);
    RnspResult r = rnsp_check(a, T, p.gamma, p.tau);
    CHECK(r.holds);

    const double lower = rnsp_to_rsv_bound(p.gamma, p.tau);
    for (std::uint64_t mask = 0; mask < 4; ++mask) {
      Vector x0 = sparse_signal(sub, 10, T, mask);
      RsvResult rsv = restricted_sv(a, Cone::l1_descent(x0));
      CHECK(lower <= rsv.sigma + 1e-6);
    }
  }
}

TEST_CASE("rip_to_asc_angle: formula values") {
  auto t = rip_to_asc_angle(0.0, 0.0, 100, 2);
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(M_PI_2));

  CHECK(!rip_to_asc_angle(0.5, 0.5, 100, 1).has_value());
  CHECK_THROWS_AS(rip_to_asc_angle(1.0, 0.1, 10, 1), input_error);

  // hand evaluation of the constant
  auto t2 = rip_to_asc_angle(0.1, 0.05, 9, 3);
  REQUIRE(t2.has_value());
  const double c = (1.0 / 0.9) * (0.1 + std::sqrt(5.0) * 2.0 * 0.05 / 1.1);
  CHECK(*t2 == doctest::Approx(std::acos(c)).epsilon(1e-12));
}

TEST_CASE("block_partition: sorted runs, ties, small complement") {
  Vector u(6);
  u << 9.0, 0.1, 0.5, 0.3, 0.2, 0.4;
  auto blocks = block_partition(u, {0}, 2);
  REQUIRE(blocks.size() == 3);
  CHECK(blocks[0] == std::vector<Eigen::Index>{2, 5});
  CHECK(blocks[1] == std::vector<Eigen::Index>{3, 4});
  CHECK(blocks[2] == std::vector<Eigen::Index>{1});

  Vector ties(5);
  ties << 1.0, 0.5, 0.5, 0.5, 0.5;
  auto tie_blocks = block_partition(ties, {0}, 2);
  CHECK(tie_blocks[0] == std::vector<Eigen::Index>{1, 2});
  CHECK(tie_blocks[1] == std::vector<Eigen::Index>{3, 4});

  auto single = block_partition(u, {0, 1, 2, 3}, 5);
  REQUIRE(single.size() == 1);
  CHECK(single[0].size() == 2);
}

TEST_CASE("block_partition: monotonicity clauses hold exactly") {
  RngStream rng(309, 0);
  for (int t = 0; t < 200; ++t) {
    Vector u = gaussian_vector(rng, 12);
    std::vector<Eigen::Index> S0 = {0, 5, 7};
    const int s = 3;
    auto blocks = block_partition(u, S0, s);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      CHECK(blocks[b].size() <= static_cast<std::size_t>(s));
      if (b + 1 < blocks.size()) {
        double mn = std::numeric_limits<double>::infinity();
        for (auto i : blocks[b]) mn = std::min(mn, std::abs(u(i)));
        double mx = 0.0;
        for (auto i : blocks[b + 1]) mx = std::max(mx, std::abs(u(i)));
        CHECK(mn >= mx);
      }
    }
  }
}

TEST_CASE("check_sqrt5_bound: support-only directions give ratio 1") {
  Vector x0 = Vector::Zero(8);
  x0(1) = 2.0;
  x0(5) = -1.0;
  Cone c = Cone::l1_descent(x0);
  Vector u = -x0; // member; supported on S0 only
  CHECK(c.membership(u, 1e-12));
  auto blocks = block_partition(u, {1, 5}, 2);
  double acc = std::sqrt(u(1) * u(1) + u(5) * u(5));
  for (const auto& blk : blocks) {
    double bs = 0.0;
    for (auto i : blk) bs += u(i) * u(i);
    acc += std::sqrt(bs);
  }
  CHECK(acc / u.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("check_sqrt5_bound: sampled descent-cone vectors stay below sqrt(5)") {
  Vector x0 = Vector::Zero(30);
  x0(3) = 1.4;
  x0(11) = -0.8;
  x0(22) = 2.2;
  ExperimentReport rep = check_sqrt5_bound(30, x0, 2000, RngStream(310, 0));
  CHECK(rep.pass);
  CHECK(rep.observed["max_ratio"].get<double>() < std::sqrt(5.0));
  CHECK(rep.observed["samples_used"].get<int>() > 1500);
}

TEST_CASE("asc_to_rnsp: formulas and limits") {
  RnspParams p = asc_to_rnsp(M_PI_2, 2.0, {0, 1, 2});
  CHECK(p.gamma == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.tau == doctest::Approx(std::sqrt(3.0) / (2.0 * std::sin(M_PI / 4))).epsilon(1e-12));

  RnspParams small = asc_to_rnsp(1e-4, 1.0, {0});
  CHECK(small.gamma > 0.999999);
  CHECK(small.tau > 1e4 / 2.0);
  CHECK_THROWS_AS(asc_to_rnsp(0.0, 1.0, {0}), input_error);
}

TEST_CASE("rnsp_to_rsv_bound: values and limits") {
  CHECK(rnsp_to_rsv_bound(0.0, 1.0) == doctest::Approx(0.5));
  CHECK(rnsp_to_rsv_bound(1.0 - 1e-9, 1.0) <= 1e-9);
  CHECK_THROWS_AS(rnsp_to_rsv_bound(1.0, 1.0), input_error);
}

TEST_CASE("polytope_mu: vanishing projections when U is orthogonal to the hull") {
  Polytope sq;
  const double vs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  for (auto& v : vs) {
    Vector vert(3);
    vert << v[0], v[1], 0.0;
    sq.vertices.push_back(vert);
  }
  auto add_hs = [&](double a, double b, double c, double off) {
    Vector n(3);
    n << a, b, c;
    sq.halfspaces.push_back({n, off});
  };
  add_hs(1, 0, 0, 1);
  add_hs(-1, 0, 0, 1);
  add_hs(0, 1, 0, 1);
  add_hs(0, -1, 0, 1);
  add_hs(0, 0, 1, 0);
  add_hs(0, 0, -1, 0);

  Vector x0(3);
  x0 << 0.2, -0.3, 0.0;
  Matrix U(3, 1);
  U << 0, 0, 1;
  MuOptions opts;
  opts.samples = 5000;
  CHECK(polytope_mu(sq, x0, U, opts) <= 1e-9);
}

TEST_CASE("polytope_mu: cross-polytope edge face constancy") {
  Polytope p = cross_polytope(3);
  Matrix U(3, 1);
  U << 0, 0, 1;
  MuOptions opts;
  opts.samples = 40000;

  Vector a(3), b(3);
  a << 0.5, 0.5, 0.0;
  b << 0.7, 0.3, 0.0;
  const double mu_a = polytope_mu(p, a, U, opts);
  const double mu_b = polytope_mu(p, b, U, opts);
  CHECK(std::abs(mu_a - mu_b) <= 1e-3);
  CHECK(mu_a == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(2e-3));
  CHECK(mu_a < 1.0 - 1e-6);
}

TEST_CASE("polytope_mu: vertex instance and precondition violation") {
  Polytope p = cross_polytope(3);
  Vector e1(3);
  e1 << 1, 0, 0;
  Matrix U(3, 1);
  U << 0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  MuOptions opts;
  opts.samples = 40000;
  const double mu = polytope_mu(p, e1, U, opts);
  CHECK(mu == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(2e-3));
  CHECK(mu < 1.0 - 1e-6);

  // direction inside the incident edge: line meets P in a segment
  Vector mid(3);
  mid << 0.5, 0.5, 0.0;
  Matrix bad(3, 1);
  bad << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0;
  CHECK_THROWS_AS(polytope_mu(p, mid, bad, opts), input_error);
}
